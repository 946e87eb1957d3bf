#include <doctest.h>

#include "dam/syntax.hpp"

using namespace dam;

namespace {

const SurfaceTerm& S(const SurfacePtr& p) { return *p; }

template <class T>
const T& as(const SurfacePtr& p) {
    const T* x = std::get_if<T>(&p->node);
    REQUIRE(x != nullptr);
    return *x;
}

std::string syntax_error(const std::string& src) {
    try {
        parse(src);
    } catch (const SyntaxError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("parse identity") {
    auto t = parse("fn x. x");
    const auto& lam = as<SurfaceTerm::Lam>(t);
    CHECK(lam.param == "x");
    CHECK(as<SurfaceTerm::Var>(lam.body).name == "x");
}

TEST_CASE("parse the two-closure example") {
    auto t = parse("(fn x. x) (fn x. fn y. x)");
    const auto& app = as<SurfaceTerm::App>(t);
    CHECK(as<SurfaceTerm::Lam>(app.fn).param == "x");
    const auto& k = as<SurfaceTerm::Lam>(app.arg);
    CHECK(k.param == "x");
    const auto& inner = as<SurfaceTerm::Lam>(k.body);
    CHECK(inner.param == "y");
    CHECK(as<SurfaceTerm::Var>(inner.body).name == "x");
}

TEST_CASE("parse a located term") {
    auto t = parse("(fn x. x + 1) @ A");
    const auto& at = as<SurfaceTerm::At>(t);
    CHECK(at.node == NodeName("A"));
    const auto& lam = as<SurfaceTerm::Lam>(at.body);
    const auto& add = as<SurfaceTerm::BinOp>(lam.body);
    CHECK(add.op == PrimOp::Add);
    CHECK(as<SurfaceTerm::Var>(add.lhs).name == "x");
    CHECK(as<SurfaceTerm::Lit>(add.rhs).value == 1);
}

TEST_CASE("precedence and associativity") {
    CHECK(same_shape(S(parse("a b c")), S(parse("(a b) c"))));
    CHECK(same_shape(S(parse("1 + 2 * 3")), S(parse("1 + (2 * 3)"))));
    CHECK(same_shape(S(parse("1 - 2 - 3")), S(parse("(1 - 2) - 3"))));
    CHECK(same_shape(S(parse("f x @ A")), S(parse("(f x) @ A"))));
    CHECK(same_shape(S(parse("f x + 1")), S(parse("(f x) + 1"))));
    CHECK_FALSE(same_shape(S(parse("a (b c)")), S(parse("(a b) c"))));
}

TEST_CASE("comments and primes") {
    auto t = parse("-- a comment\nfn x'. x' -- trailing\n");
    CHECK(as<SurfaceTerm::Lam>(t).param == "x'");
}

TEST_CASE("syntax errors carry line and column") {
    try {
        parse("fn x.\n  (x");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.pos().line == 2);
        CHECK(std::string(e.what()).find("2:") == 0);
    }
    CHECK(syntax_error("(fn x. x").find("unbalanced parentheses") != std::string::npos);
    CHECK(syntax_error("fn in. in").find("reserved word 'in'") != std::string::npos);
    CHECK(syntax_error("1 +").size() > 0);
    CHECK(syntax_error("x )").size() > 0);
    CHECK(syntax_error("f @ a").size() > 0);
}

TEST_CASE("resolve to de Bruijn indices") {
    auto k = resolve(S(parse("fn x. fn y. x"))).term;
    CHECK(*k == *term::lam(term::lam(term::var(1))));
    auto id = resolve(S(parse("fn x. x"))).term;
    CHECK(*id == *term::lam(term::var(0)));
    auto let = resolve(S(parse("let z = 3 in z"))).term;
    CHECK(*let == *term::app(term::lam(term::var(0)), term::lit(3)));
    auto shadow = resolve(S(parse("fn x. fn x. x"))).term;
    CHECK(*shadow == *term::lam(term::lam(term::var(0))));
}

TEST_CASE("resolve collects node names") {
    auto r = resolve(S(parse("(fn x. x @ B) @ A")));
    CHECK(r.nodes == std::set<NodeName>{NodeName("A"), NodeName("B")});
}

TEST_CASE("unbound variables are named") {
    try {
        resolve(S(parse("fn x. y")));
        FAIL("expected a resolve error");
    } catch (const ResolveError& e) {
        CHECK(e.identifier() == "y");
        CHECK(std::string(e.what()).find("'y'") != std::string::npos);
    }
}

TEST_CASE("closedness of located terms") {
    CHECK(check_closed_at(*term::at(term::lam(term::var(0)), NodeName("A"))).empty());
    auto bad = check_closed_at(*term::lam(term::at(term::var(0), NodeName("A"))));
    REQUIRE(bad.size() == 1);
    CHECK(bad[0].path == std::vector<std::size_t>{0});
    CHECK(bad[0].index == 0);
    auto ok = term::lam(term::at(term::app(term::lam(term::var(0)), term::lit(1)), NodeName("A")));
    CHECK(check_closed_at(*ok).empty());
}

TEST_CASE("open located terms are reported, closed ones are not") {
    CHECK(check_closed_at(*load_source("fn x. x @ A").term).size() == 1);
    CHECK(check_closed_at(*load_source("fn x. (fn y. y) @ A").term).empty());
}

TEST_CASE("generator: size one gives a literal") {
    for (std::uint64_t s = 0; s < 50; ++s) {
        auto t = gen_term(s, 1, {});
        CHECK(std::holds_alternative<CoreTerm::Lit>(t->node));
    }
}

TEST_CASE("generator: closed, bounded and deterministic") {
    std::vector<NodeName> none;
    std::vector<NodeName> ab{NodeName("A"), NodeName("B")};
    std::size_t violations = 0;
    std::size_t oversize = 0;
    std::size_t open = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        for (std::size_t k = 1; k <= 30; ++k) {
            auto t = gen_term(s, k, s % 2 ? ab : none);
            violations += check_closed_at(*t).size();
            open += free_index_bound(*t) != 0;
            oversize += term_size(*t) > k;
        }
    }
    CHECK(violations == 0);
    CHECK(open == 0);
    CHECK(oversize == 0);
    for (std::uint64_t s = 0; s < 100; ++s) CHECK(*gen_term(s, 25, ab) == *gen_term(s, 25, ab));
}

TEST_CASE("printing then resolving is the identity on generated terms") {
    std::vector<NodeName> ab{NodeName("A"), NodeName("B")};
    for (std::uint64_t s = 0; s < 500; ++s) {
        auto t = gen_term(s, 1 + s % 40, ab);
        auto text = print_surface(*t);
        auto back = load_source(text).term;
        INFO(text);
        CHECK(*back == *t);
    }
}

TEST_CASE("show_core") {
    CHECK(show_core(*term::app(term::lam(term::var(0)), term::lit(3))) == "App(Lam(Var 0), Lit 3)");
}
