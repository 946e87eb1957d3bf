#include <doctest.h>

#include <limits>

#include "dam/bytecode.hpp"
#include "support.hpp"

using namespace dam;

namespace {

std::string root_code(const CodeTable& t) { return show_code(t, t.root); }

// Every path through `r` ends in the terminator T.
template <class T>
bool ends_in(const CodeTable& table, CodeRef r) {
    const auto& term = table.at(r).term;
    if (const auto* c = std::get_if<instr::Cond>(&term)) {
        return ends_in<T>(table, c->then_code) && ends_in<T>(table, c->else_code);
    }
    return std::holds_alternative<T>(term);
}

std::size_t deserialize_offset(const std::string& text) {
    try {
        deserialize(text);
    } catch (const DeserializeError& e) {
        return e.offset();
    }
    return 0;
}

}  // namespace

TEST_CASE("compile the two-closure example") {
    auto t = test::compile_source(test::kCodeExample);
    CHECK(root_code(t) == "CLOS (VAR 0; RET); CLOS (CLOS (VAR 1; RET); RET); APPL; END");
}

TEST_CASE("compile single equations") {
    CHECK(root_code(compile(*term::lit(5))) == "LIT 5; END");
    CHECK(root_code(compile(*term::lit(0))) == "LIT 0; END");
    CHECK(root_code(compile(*term::at(term::lit(1), NodeName("A")))) == "REMOTE (LIT 1; RET) A; END");
    CHECK(root_code(compile(*term::if0(term::lit(0), term::lit(1), term::lit(2)))) ==
          "LIT 0; COND (LIT 1; END) (LIT 2; END)");
    // Operands: right first, so the left operand ends on top.
    CHECK(root_code(compile(*term::op(PrimOp::Monus, term::lit(7), term::lit(2)))) == "LIT 2; LIT 7; OP -; END");
}

TEST_CASE("compile rejects open programs") {
    CHECK_THROWS_AS(compile(*term::var(0)), CompileError);
    CHECK_THROWS_AS(compile(*term::lam(term::at(term::var(0), NodeName("A")))), CompileError);
}

TEST_CASE("primitive operations") {
    CHECK(apply_prim(PrimOp::Monus, 2, 5) == Nat{0});
    CHECK(apply_prim(PrimOp::Monus, 5, 2) == Nat{3});
    CHECK(apply_prim(PrimOp::Add, 3, 4) == Nat{7});
    CHECK(apply_prim(PrimOp::Mul, 6, 7) == Nat{42});
    CHECK_FALSE(apply_prim(PrimOp::Mul, Nat{1} << 63, 2).has_value());
    CHECK_FALSE(apply_prim(PrimOp::Add, std::numeric_limits<Nat>::max(), 1).has_value());
}

TEST_CASE("serialize round trip on the example") {
    auto t = test::compile_source(test::kCodeExample);
    auto text = serialize(t);
    CHECK(deserialize(text) == t);
    CHECK(serialize(deserialize(text)) == text);
}

TEST_CASE("deserialize a bare code block") {
    auto t = deserialize("(code end)");
    REQUIRE(t.entries.size() == 1);
    CHECK(t.at(t.root).body.empty());
    CHECK(std::holds_alternative<instr::End>(t.at(t.root).term));
}

TEST_CASE("deserialize errors name the offset") {
    CHECK(deserialize_offset("(code appl") == 11);
    CHECK(deserialize_offset("(code (bogus) end)") > 0);
    CHECK(deserialize_offset("(table root 3 (code end))") > 0);
    // A code block may not refer to itself.
    CHECK_THROWS_AS(deserialize("(table root 0 (code (clos 0) end))"), DeserializeError);
}

TEST_CASE("compiled code is well formed on generated terms") {
    std::vector<NodeName> ab{NodeName("A"), NodeName("B")};
    std::size_t worst_over = 0;
    for (std::uint64_t s = 0; s < 2000; ++s) {
        auto t = gen_term(s, 1 + s % 30, ab);
        auto table = compile(*t);
        // Functions and remote bodies end in RET, the root ends in END.
        for (const auto& c : table.entries) {
            for (const auto& i : c.body) {
                if (const auto* cl = std::get_if<instr::Clos>(&i)) {
                    CHECK(ends_in<instr::Ret>(table, cl->code));
                }
                if (const auto* r = std::get_if<instr::Remote>(&i)) {
                    CHECK(ends_in<instr::Ret>(table, r->code));
                }
            }
        }
        CHECK(ends_in<instr::End>(table, table.root));
        CHECK(deserialize(serialize(table)) == table);
        std::size_t bound = 4 * term_size(*t) + 1;
        if (instruction_count(table) > bound) worst_over = std::max(worst_over, instruction_count(table) - bound);
    }
    CHECK(worst_over == 0);
}

TEST_CASE("remote nodes are listed") {
    auto t = test::compile_source(test::kFactorialRemote);
    CHECK(remote_nodes(t) == std::vector<NodeName>{NodeName("B")});
    CHECK(remote_nodes(test::compile_source(test::kFactorial)).empty());
}
