#include "dam/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace dam {

SyntaxError::SyntaxError(const std::string& msg, SourcePos pos)
    : InputError(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + msg), pos_(pos) {}

ResolveError::ResolveError(std::string identifier)
    : InputError("unbound variable '" + identifier + "'"), identifier_(std::move(identifier)) {}

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Upper, Nat, LParen, RParen, Dot, Equals, Plus, Minus, Star, At, Fn, Let, In, If0, Then, Else, Eof };

struct Token {
    Tok kind;
    std::string text;
    SourcePos pos;
    Nat value = 0;
};

const char* tok_desc(Tok k) {
    switch (k) {
        case Tok::Ident: return "identifier";
        case Tok::Upper: return "node name";
        case Tok::Nat: return "number";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Dot: return "'.'";
        case Tok::Equals: return "'='";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::At: return "'@'";
        case Tok::Fn: return "'fn'";
        case Tok::Let: return "'let'";
        case Tok::In: return "'in'";
        case Tok::If0: return "'if0'";
        case Tok::Then: return "'then'";
        case Tok::Else: return "'else'";
        case Tok::Eof: return "end of input";
    }
    return "?";
}

bool is_ident_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '\'';
}

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    SourcePos pos;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++pos.line;
                pos.column = 1;
            } else {
                ++pos.column;
            }
            ++i;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Token t{Tok::Eof, std::string(1, c), pos};
        auto u = static_cast<unsigned char>(c);
        if (std::isdigit(u)) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            t.kind = Tok::Nat;
            t.text = std::string(src.substr(i, j - i));
            Nat v = 0;
            for (char d : t.text) {
                Nat digit = static_cast<Nat>(d - '0');
                if (v > (std::numeric_limits<Nat>::max() - digit) / 10) {
                    throw SyntaxError("numeric literal out of range: " + t.text, pos);
                }
                v = v * 10 + digit;
            }
            t.value = v;
            advance(j - i);
            out.push_back(std::move(t));
            continue;
        }
        if (std::isalpha(u) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && is_ident_char(src[j])) ++j;
            t.text = std::string(src.substr(i, j - i));
            if (std::isupper(u)) {
                if (!NodeName::is_valid(t.text)) throw SyntaxError("invalid node name '" + t.text + "'", pos);
                t.kind = Tok::Upper;
            } else if (t.text == "fn") {
                t.kind = Tok::Fn;
            } else if (t.text == "let") {
                t.kind = Tok::Let;
            } else if (t.text == "in") {
                t.kind = Tok::In;
            } else if (t.text == "if0") {
                t.kind = Tok::If0;
            } else if (t.text == "then") {
                t.kind = Tok::Then;
            } else if (t.text == "else") {
                t.kind = Tok::Else;
            } else if (std::islower(u)) {
                t.kind = Tok::Ident;
            } else {
                throw SyntaxError("identifier must start with a lowercase letter: '" + t.text + "'", pos);
            }
            advance(j - i);
            out.push_back(std::move(t));
            continue;
        }
        switch (c) {
            case '(': t.kind = Tok::LParen; break;
            case ')': t.kind = Tok::RParen; break;
            case '.': t.kind = Tok::Dot; break;
            case '=': t.kind = Tok::Equals; break;
            case '+': t.kind = Tok::Plus; break;
            case '-': t.kind = Tok::Minus; break;
            case '*': t.kind = Tok::Star; break;
            case '@': t.kind = Tok::At; break;
            default:
                throw SyntaxError(std::string("unexpected character '") + c + "'", pos);
        }
        advance(1);
        out.push_back(std::move(t));
    }
    out.push_back(Token{Tok::Eof, "", pos});
    return out;
}

bool is_keyword(Tok k) {
    return k == Tok::Fn || k == Tok::Let || k == Tok::In || k == Tok::If0 || k == Tok::Then || k == Tok::Else;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    SurfacePtr program() {
        auto t = term();
        if (peek().kind == Tok::RParen) throw SyntaxError("unbalanced parentheses: unexpected ')'", peek().pos);
        if (peek().kind != Tok::Eof) unexpected("end of input");
        return t;
    }

private:
    std::vector<Token> toks_;
    std::size_t at_ = 0;

    const Token& peek() const { return toks_[at_]; }
    Token next() { return toks_[at_++]; }

    [[noreturn]] void unexpected(const std::string& wanted) const {
        const Token& t = peek();
        if (t.kind == Tok::Eof && depth_ > 0) throw SyntaxError("unbalanced parentheses: missing ')'", t.pos);
        if (is_keyword(t.kind) && wanted == "identifier") {
            throw SyntaxError("reserved word '" + t.text + "' cannot be used as an identifier", t.pos);
        }
        std::string got = t.kind == Tok::Eof ? "end of input" : "'" + t.text + "'";
        throw SyntaxError("expected " + wanted + ", found " + got, t.pos);
    }

    Token expect(Tok k) {
        if (peek().kind != k) unexpected(tok_desc(k));
        return next();
    }

    static SurfacePtr mk(SurfaceTerm::Node n, SourcePos p) {
        return std::make_shared<const SurfaceTerm>(SurfaceTerm{std::move(n), p});
    }

    SurfacePtr term() {
        const Token& t = peek();
        SourcePos p = t.pos;
        switch (t.kind) {
            case Tok::Fn: {
                next();
                auto x = expect(Tok::Ident);
                expect(Tok::Dot);
                auto body = term();
                return mk(SurfaceTerm::Lam{x.text, body}, p);
            }
            case Tok::Let: {
                next();
                auto x = expect(Tok::Ident);
                expect(Tok::Equals);
                auto bound = term();
                expect(Tok::In);
                auto body = term();
                return mk(SurfaceTerm::Let{x.text, bound, body}, p);
            }
            case Tok::If0: {
                next();
                auto c = term();
                expect(Tok::Then);
                auto th = term();
                expect(Tok::Else);
                auto el = term();
                return mk(SurfaceTerm::If0{c, th, el}, p);
            }
            default:
                return located();
        }
    }

    SurfacePtr located() {
        auto t = sum();
        while (peek().kind == Tok::At) {
            SourcePos p = next().pos;
            auto n = expect(Tok::Upper);
            t = mk(SurfaceTerm::At{t, NodeName(n.text)}, p);
        }
        return t;
    }

    SurfacePtr sum() {
        auto lhs = product();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            auto op = next();
            auto rhs = product();
            lhs = mk(SurfaceTerm::BinOp{op.kind == Tok::Plus ? PrimOp::Add : PrimOp::Monus, lhs, rhs}, op.pos);
        }
        return lhs;
    }

    SurfacePtr product() {
        auto lhs = app();
        while (peek().kind == Tok::Star) {
            auto op = next();
            auto rhs = app();
            lhs = mk(SurfaceTerm::BinOp{PrimOp::Mul, lhs, rhs}, op.pos);
        }
        return lhs;
    }

    static bool starts_atom(Tok k) { return k == Tok::Ident || k == Tok::Nat || k == Tok::LParen; }

    SurfacePtr app() {
        auto fn = atom();
        while (starts_atom(peek().kind)) {
            SourcePos p = peek().pos;
            auto arg = atom();
            fn = mk(SurfaceTerm::App{fn, arg}, p);
        }
        return fn;
    }

    int depth_ = 0;

    SurfacePtr atom() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Ident: {
                auto tok = next();
                return mk(SurfaceTerm::Var{tok.text}, tok.pos);
            }
            case Tok::Nat: {
                auto tok = next();
                return mk(SurfaceTerm::Lit{tok.value}, tok.pos);
            }
            case Tok::LParen: {
                next();
                ++depth_;
                auto inner = term();
                if (peek().kind != Tok::RParen) unexpected("')'");
                --depth_;
                next();
                return inner;
            }
            case Tok::RParen:
                throw SyntaxError("unbalanced parentheses: unexpected ')'", t.pos);
            default:
                if (is_keyword(t.kind)) {
                    throw SyntaxError("reserved word '" + t.text + "' is not allowed here", t.pos);
                }
                unexpected("a term");
        }
    }
};

}  // namespace

SurfacePtr parse(std::string_view text) {
    Parser p(lex(text));
    return p.program();
}

bool same_shape(const SurfaceTerm& a, const SurfaceTerm& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        overloaded{
            [&](const SurfaceTerm::Var& x) { return x.name == std::get<SurfaceTerm::Var>(b.node).name; },
            [&](const SurfaceTerm::Lam& x) {
                const auto& y = std::get<SurfaceTerm::Lam>(b.node);
                return x.param == y.param && same_shape(*x.body, *y.body);
            },
            [&](const SurfaceTerm::App& x) {
                const auto& y = std::get<SurfaceTerm::App>(b.node);
                return same_shape(*x.fn, *y.fn) && same_shape(*x.arg, *y.arg);
            },
            [&](const SurfaceTerm::Lit& x) { return x.value == std::get<SurfaceTerm::Lit>(b.node).value; },
            [&](const SurfaceTerm::BinOp& x) {
                const auto& y = std::get<SurfaceTerm::BinOp>(b.node);
                return x.op == y.op && same_shape(*x.lhs, *y.lhs) && same_shape(*x.rhs, *y.rhs);
            },
            [&](const SurfaceTerm::If0& x) {
                const auto& y = std::get<SurfaceTerm::If0>(b.node);
                return same_shape(*x.cond, *y.cond) && same_shape(*x.then_branch, *y.then_branch) &&
                       same_shape(*x.else_branch, *y.else_branch);
            },
            [&](const SurfaceTerm::At& x) {
                const auto& y = std::get<SurfaceTerm::At>(b.node);
                return x.node == y.node && same_shape(*x.body, *y.body);
            },
            [&](const SurfaceTerm::Let& x) {
                const auto& y = std::get<SurfaceTerm::Let>(b.node);
                return x.name == y.name && same_shape(*x.bound, *y.bound) && same_shape(*x.body, *y.body);
            },
        },
        a.node);
}

// ---------------------------------------------------------------------------
// Core terms

namespace term {
static TermPtr mk(CoreTerm::Node n) { return std::make_shared<const CoreTerm>(CoreTerm{std::move(n)}); }
TermPtr lam(TermPtr body) { return mk(CoreTerm::Lam{std::move(body)}); }
TermPtr app(TermPtr fn, TermPtr arg) { return mk(CoreTerm::App{std::move(fn), std::move(arg)}); }
TermPtr var(std::size_t index) { return mk(CoreTerm::Var{index}); }
TermPtr lit(Nat value) { return mk(CoreTerm::Lit{value}); }
TermPtr op(PrimOp o, TermPtr lhs, TermPtr rhs) { return mk(CoreTerm::Op{o, std::move(lhs), std::move(rhs)}); }
TermPtr if0(TermPtr c, TermPtr t, TermPtr e) { return mk(CoreTerm::If0{std::move(c), std::move(t), std::move(e)}); }
TermPtr at(TermPtr body, NodeName node) { return mk(CoreTerm::At{std::move(body), std::move(node)}); }
}  // namespace term

bool operator==(const CoreTerm& a, const CoreTerm& b) {
    if (&a == &b) return true;
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        overloaded{
            [&](const CoreTerm::Lam& x) { return *x.body == *std::get<CoreTerm::Lam>(b.node).body; },
            [&](const CoreTerm::App& x) {
                const auto& y = std::get<CoreTerm::App>(b.node);
                return *x.fn == *y.fn && *x.arg == *y.arg;
            },
            [&](const CoreTerm::Var& x) { return x.index == std::get<CoreTerm::Var>(b.node).index; },
            [&](const CoreTerm::Lit& x) { return x.value == std::get<CoreTerm::Lit>(b.node).value; },
            [&](const CoreTerm::Op& x) {
                const auto& y = std::get<CoreTerm::Op>(b.node);
                return x.op == y.op && *x.lhs == *y.lhs && *x.rhs == *y.rhs;
            },
            [&](const CoreTerm::If0& x) {
                const auto& y = std::get<CoreTerm::If0>(b.node);
                return *x.cond == *y.cond && *x.then_branch == *y.then_branch && *x.else_branch == *y.else_branch;
            },
            [&](const CoreTerm::At& x) {
                const auto& y = std::get<CoreTerm::At>(b.node);
                return x.node == y.node && *x.body == *y.body;
            },
        },
        a.node);
}

std::size_t term_size(const CoreTerm& t) {
    return std::visit(overloaded{
                          [](const CoreTerm::Lam& x) { return 1 + term_size(*x.body); },
                          [](const CoreTerm::App& x) { return 1 + term_size(*x.fn) + term_size(*x.arg); },
                          [](const CoreTerm::Var&) -> std::size_t { return 1; },
                          [](const CoreTerm::Lit&) -> std::size_t { return 1; },
                          [](const CoreTerm::Op& x) { return 1 + term_size(*x.lhs) + term_size(*x.rhs); },
                          [](const CoreTerm::If0& x) {
                              return 1 + term_size(*x.cond) + term_size(*x.then_branch) + term_size(*x.else_branch);
                          },
                          [](const CoreTerm::At& x) { return 1 + term_size(*x.body); },
                      },
                      t.node);
}

namespace {

std::size_t bound_at(const CoreTerm& t, std::size_t depth) {
    return std::visit(overloaded{
                          [&](const CoreTerm::Lam& x) { return bound_at(*x.body, depth + 1); },
                          [&](const CoreTerm::App& x) {
                              return std::max(bound_at(*x.fn, depth), bound_at(*x.arg, depth));
                          },
                          [&](const CoreTerm::Var& x) -> std::size_t {
                              return x.index >= depth ? x.index - depth + 1 : 0;
                          },
                          [&](const CoreTerm::Lit&) -> std::size_t { return 0; },
                          [&](const CoreTerm::Op& x) {
                              return std::max(bound_at(*x.lhs, depth), bound_at(*x.rhs, depth));
                          },
                          [&](const CoreTerm::If0& x) {
                              return std::max({bound_at(*x.cond, depth), bound_at(*x.then_branch, depth),
                                               bound_at(*x.else_branch, depth)});
                          },
                          [&](const CoreTerm::At& x) { return bound_at(*x.body, depth); },
                      },
                      t.node);
}

struct Resolver {
    std::vector<std::string> scope;
    std::set<NodeName> nodes;

    TermPtr go(const SurfaceTerm& t) {
        return std::visit(
            overloaded{
                [&](const SurfaceTerm::Var& x) -> TermPtr {
                    for (std::size_t k = scope.size(); k-- > 0;) {
                        if (scope[k] == x.name) return term::var(scope.size() - 1 - k);
                    }
                    throw ResolveError(x.name);
                },
                [&](const SurfaceTerm::Lam& x) {
                    scope.push_back(x.param);
                    auto body = go(*x.body);
                    scope.pop_back();
                    return term::lam(body);
                },
                [&](const SurfaceTerm::App& x) {
                    auto f = go(*x.fn);
                    return term::app(f, go(*x.arg));
                },
                [&](const SurfaceTerm::Lit& x) { return term::lit(x.value); },
                [&](const SurfaceTerm::BinOp& x) {
                    auto l = go(*x.lhs);
                    return term::op(x.op, l, go(*x.rhs));
                },
                [&](const SurfaceTerm::If0& x) {
                    auto c = go(*x.cond);
                    auto th = go(*x.then_branch);
                    return term::if0(c, th, go(*x.else_branch));
                },
                [&](const SurfaceTerm::At& x) {
                    nodes.insert(x.node);
                    return term::at(go(*x.body), x.node);
                },
                [&](const SurfaceTerm::Let& x) {
                    auto bound = go(*x.bound);
                    scope.push_back(x.name);
                    auto body = go(*x.body);
                    scope.pop_back();
                    return term::app(term::lam(body), bound);
                },
            },
            t.node);
    }
};

void closed_walk(const CoreTerm& t, std::vector<std::size_t>& path, std::vector<ClosednessViolation>& out) {
    auto child = [&](std::size_t i, const TermPtr& c) {
        path.push_back(i);
        closed_walk(*c, path, out);
        path.pop_back();
    };
    std::visit(overloaded{
                   [&](const CoreTerm::Lam& x) { child(0, x.body); },
                   [&](const CoreTerm::App& x) {
                       child(0, x.fn);
                       child(1, x.arg);
                   },
                   [&](const CoreTerm::Var&) {},
                   [&](const CoreTerm::Lit&) {},
                   [&](const CoreTerm::Op& x) {
                       child(0, x.lhs);
                       child(1, x.rhs);
                   },
                   [&](const CoreTerm::If0& x) {
                       child(0, x.cond);
                       child(1, x.then_branch);
                       child(2, x.else_branch);
                   },
                   [&](const CoreTerm::At& x) {
                       std::set<std::size_t> escaping;
                       std::function<void(const CoreTerm&, std::size_t)> scan = [&](const CoreTerm& u,
                                                                                     std::size_t d) {
                           std::visit(overloaded{
                                          [&](const CoreTerm::Lam& y) { scan(*y.body, d + 1); },
                                          [&](const CoreTerm::App& y) {
                                              scan(*y.fn, d);
                                              scan(*y.arg, d);
                                          },
                                          [&](const CoreTerm::Var& y) {
                                              if (y.index >= d) escaping.insert(y.index - d);
                                          },
                                          [&](const CoreTerm::Lit&) {},
                                          [&](const CoreTerm::Op& y) {
                                              scan(*y.lhs, d);
                                              scan(*y.rhs, d);
                                          },
                                          [&](const CoreTerm::If0& y) {
                                              scan(*y.cond, d);
                                              scan(*y.then_branch, d);
                                              scan(*y.else_branch, d);
                                          },
                                          [&](const CoreTerm::At& y) { scan(*y.body, d); },
                                      },
                                      u.node);
                       };
                       scan(*x.body, 0);
                       for (std::size_t e : escaping) out.push_back(ClosednessViolation{path, e});
                       child(0, x.body);
                   },
               },
               t.node);
}

}  // namespace

std::size_t free_index_bound(const CoreTerm& t) { return bound_at(t, 0); }

Resolved resolve(const SurfaceTerm& t) {
    Resolver r;
    auto core = r.go(t);
    return Resolved{core, std::move(r.nodes)};
}

Resolved load_source(std::string_view text) { return resolve(*parse(text)); }

std::vector<ClosednessViolation> check_closed_at(const CoreTerm& t) {
    std::vector<ClosednessViolation> out;
    std::vector<std::size_t> path;
    closed_walk(t, path, out);
    return out;
}

std::string describe(const ClosednessViolation& v) {
    std::ostringstream os;
    os << "'@' body at path [";
    for (std::size_t i = 0; i < v.path.size(); ++i) os << (i ? "," : "") << v.path[i];
    os << "] is not closed: variable with index " << v.index << " escapes the annotation";
    return os.str();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Precedence levels: 0 term, 1 located, 2 sum, 3 product, 4 app, 5 atom.
void print_at(const CoreTerm& t, int level, std::size_t depth, std::string& out) {
    auto name = [](std::size_t d) { return "v" + std::to_string(d); };
    auto open = [&](int needed) {
        bool paren = level > needed;
        if (paren) out += '(';
        return paren;
    };
    std::visit(overloaded{
                   [&](const CoreTerm::Lam& x) {
                       bool p = open(0);
                       out += "fn " + name(depth) + ". ";
                       print_at(*x.body, 0, depth + 1, out);
                       if (p) out += ')';
                   },
                   [&](const CoreTerm::App& x) {
                       bool p = open(4);
                       print_at(*x.fn, 4, depth, out);
                       out += ' ';
                       print_at(*x.arg, 5, depth, out);
                       if (p) out += ')';
                   },
                   [&](const CoreTerm::Var& x) {
                       if (x.index < depth) {
                           out += name(depth - 1 - x.index);
                       } else {
                           out += "free" + std::to_string(x.index - depth);
                       }
                   },
                   [&](const CoreTerm::Lit& x) { out += std::to_string(x.value); },
                   [&](const CoreTerm::Op& x) {
                       int lvl = x.op == PrimOp::Mul ? 3 : 2;
                       bool p = open(lvl);
                       print_at(*x.lhs, lvl, depth, out);
                       out += ' ';
                       out += prim_symbol(x.op);
                       out += ' ';
                       print_at(*x.rhs, lvl + 1, depth, out);
                       if (p) out += ')';
                   },
                   [&](const CoreTerm::If0& x) {
                       bool p = open(0);
                       out += "if0 ";
                       print_at(*x.cond, 0, depth, out);
                       out += " then ";
                       print_at(*x.then_branch, 0, depth, out);
                       out += " else ";
                       print_at(*x.else_branch, 0, depth, out);
                       if (p) out += ')';
                   },
                   [&](const CoreTerm::At& x) {
                       bool p = open(1);
                       print_at(*x.body, 1, depth, out);
                       out += " @ " + x.node.str();
                       if (p) out += ')';
                   },
               },
               t.node);
}

void show_at(const CoreTerm& t, std::string& out) {
    std::visit(overloaded{
                   [&](const CoreTerm::Lam& x) {
                       out += "Lam(";
                       show_at(*x.body, out);
                       out += ')';
                   },
                   [&](const CoreTerm::App& x) {
                       out += "App(";
                       show_at(*x.fn, out);
                       out += ", ";
                       show_at(*x.arg, out);
                       out += ')';
                   },
                   [&](const CoreTerm::Var& x) { out += "Var " + std::to_string(x.index); },
                   [&](const CoreTerm::Lit& x) { out += "Lit " + std::to_string(x.value); },
                   [&](const CoreTerm::Op& x) {
                       out += "Op(";
                       out += prim_symbol(x.op);
                       out += ", ";
                       show_at(*x.lhs, out);
                       out += ", ";
                       show_at(*x.rhs, out);
                       out += ')';
                   },
                   [&](const CoreTerm::If0& x) {
                       out += "If0(";
                       show_at(*x.cond, out);
                       out += ", ";
                       show_at(*x.then_branch, out);
                       out += ", ";
                       show_at(*x.else_branch, out);
                       out += ')';
                   },
                   [&](const CoreTerm::At& x) {
                       out += "At(";
                       show_at(*x.body, out);
                       out += ", " + x.node.str() + ')';
                   },
               },
               t.node);
}

}  // namespace

std::string print_surface(const CoreTerm& t) {
    std::string out;
    print_at(t, 0, 0, out);
    return out;
}

std::string show_core(const CoreTerm& t) {
    std::string out;
    show_at(t, out);
    return out;
}

// ---------------------------------------------------------------------------
// Generator

namespace {

// N: Nat.  F: Nat -> Nat.  H: (Nat -> Nat) -> Nat.
enum class Ty { N, F, H };

class Gen {
public:
    Gen(std::uint64_t seed, const std::vector<NodeName>& nodes) : rng_(seed), nodes_(nodes) {}

    TermPtr top(std::size_t size) {
        Ty ty = (size >= 2 && draw(6) == 0) ? Ty::F : Ty::N;
        std::vector<Ty> ctx;
        return gen(ty, ctx, size);
    }

private:
    std::mt19937_64 rng_;
    const std::vector<NodeName>& nodes_;

    std::uint64_t draw(std::uint64_t n) { return rng_() % n; }

    // Splits `b` into a part in [lo, b - rest_min].
    std::size_t split(std::size_t b, std::size_t lo, std::size_t rest_min) {
        std::size_t hi = b - rest_min;
        return lo + static_cast<std::size_t>(draw(hi - lo + 1));
    }

    static std::size_t min_size(Ty ty) {
        switch (ty) {
            case Ty::N: return 1;
            case Ty::F: return 2;
            case Ty::H: return 4;
        }
        return 1;
    }

    std::vector<std::size_t> vars_of(Ty ty, const std::vector<Ty>& ctx) {
        std::vector<std::size_t> out;
        for (std::size_t k = 0; k < ctx.size(); ++k) {
            if (ctx[ctx.size() - 1 - k] == ty) out.push_back(k);
        }
        return out;
    }

    TermPtr pick_var(const std::vector<std::size_t>& vs) { return term::var(vs[draw(vs.size())]); }

    TermPtr at_wrap(Ty ty, std::size_t b) {
        std::vector<Ty> empty;
        auto body = gen(ty, empty, b - 1);
        return term::at(body, nodes_[draw(nodes_.size())]);
    }

    TermPtr omega() {
        auto self = term::lam(term::app(term::var(0), term::var(0)));
        return term::app(self, self);
    }

    TermPtr gen(Ty ty, std::vector<Ty>& ctx, std::size_t b) {
        switch (ty) {
            case Ty::N: return gen_nat(ctx, b);
            case Ty::F: return gen_fun(ctx, b);
            case Ty::H: return gen_higher(ctx, b);
        }
        return term::lit(0);
    }

    TermPtr gen_nat(std::vector<Ty>& ctx, std::size_t b) {
        auto nvars = vars_of(Ty::N, ctx);
        if (b == 1) {
            if (!nvars.empty() && draw(3) != 0) return pick_var(nvars);
            return term::lit(draw(5));
        }
        if (b >= 9 && draw(60) == 0) return omega();
        if (!nodes_.empty() && b >= 2 && draw(7) == 0) return at_wrap(Ty::N, b);
        std::uint64_t choice = draw(9);
        if (b >= 4 && (choice == 0 || choice == 8)) choice = 4 + draw(3);
        switch (choice) {
            case 0:
                if (!nvars.empty()) return pick_var(nvars);
                return term::lit(draw(10));
            case 1:
            case 2:
                if (b >= 3) {
                    std::size_t l = split(b - 1, 1, 1);
                    auto lhs = gen_nat(ctx, l);
                    auto rhs = gen_nat(ctx, b - 1 - l);
                    static const PrimOp ops[] = {PrimOp::Add, PrimOp::Monus, PrimOp::Mul};
                    return term::op(ops[draw(3)], lhs, rhs);
                }
                break;
            case 3:
                if (b >= 4) {
                    std::size_t c = split(b - 1, 1, 2);
                    std::size_t t = split(b - 1 - c, 1, 1);
                    auto cond = gen_nat(ctx, c);
                    auto th = gen_nat(ctx, t);
                    auto el = gen_nat(ctx, b - 1 - c - t);
                    return term::if0(cond, th, el);
                }
                break;
            case 4:
            case 5:
            case 6:
                if (b >= 4) {
                    std::size_t f = split(b - 1, 2, 1);
                    auto fn = gen_fun(ctx, f);
                    auto arg = gen_nat(ctx, b - 1 - f);
                    return term::app(fn, arg);
                }
                break;
            case 7:
                if (b >= 7) {
                    std::size_t h = split(b - 1, 4, 2);
                    auto fn = gen_higher(ctx, h);
                    auto arg = gen_fun(ctx, b - 1 - h);
                    return term::app(fn, arg);
                }
                break;
            default:
                break;
        }
        if (!nvars.empty() && draw(2) == 0) return pick_var(nvars);
        return term::lit(draw(10));
    }

    TermPtr gen_fun(std::vector<Ty>& ctx, std::size_t b) {
        auto fvars = vars_of(Ty::F, ctx);
        if (!fvars.empty() && (b < 2 || draw(5) == 0)) return pick_var(fvars);
        if (!nodes_.empty() && b >= 3 && draw(6) == 0) return at_wrap(Ty::F, b);
        if (b >= 6 && draw(5) == 0) {
            // Function chosen by a conditional.
            std::size_t c = split(b - 1, 1, 4);
            std::size_t t = split(b - 1 - c, 2, 2);
            auto cond = gen_nat(ctx, c);
            auto th = gen_fun(ctx, t);
            auto el = gen_fun(ctx, b - 1 - c - t);
            return term::if0(cond, th, el);
        }
        ctx.push_back(Ty::N);
        auto body = gen_nat(ctx, b - 1);
        ctx.pop_back();
        return term::lam(body);
    }

    TermPtr gen_higher(std::vector<Ty>& ctx, std::size_t b) {
        ctx.push_back(Ty::F);
        TermPtr body;
        if (b >= 4 && draw(4) != 0) {
            // fn f. f <nat>
            std::size_t rest = b - 3;
            auto arg = gen_nat(ctx, rest);
            body = term::app(term::var(0), arg);
        } else {
            body = gen_nat(ctx, b - 1);
        }
        ctx.pop_back();
        return term::lam(body);
    }
};

}  // namespace

TermPtr gen_term(std::uint64_t seed, std::size_t size, const std::vector<NodeName>& nodes) {
    if (size == 0) size = 1;
    Gen g(seed, nodes);
    return g.top(size);
}

}  // namespace dam
