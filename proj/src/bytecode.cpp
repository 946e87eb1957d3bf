#include "dam/bytecode.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace dam {

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

// Code under construction. The body is kept reversed so that prepending an
// instruction (the only operation compile' needs) is a push_back.
struct Building {
    std::vector<Instr> rev_body;
    Terminator term;
};

Building from_code(const Code& c) {
    return Building{std::vector<Instr>(c.body.rbegin(), c.body.rend()), c.term};
}

CodeRef finish(Building b, CodeTable& table) {
    std::reverse(b.rev_body.begin(), b.rev_body.end());
    return table.intern(Code{std::move(b.rev_body), std::move(b.term)});
}

Building compile_prime(const CoreTerm& t, Building c, CodeTable& table) {
    return std::visit(
        overloaded{
            [&](const CoreTerm::Lam& x) {
                CodeRef body = finish(compile_prime(*x.body, Building{{}, instr::Ret{}}, table), table);
                c.rev_body.push_back(instr::Clos{body});
                return std::move(c);
            },
            [&](const CoreTerm::App& x) {
                c.rev_body.push_back(instr::Appl{});
                return compile_prime(*x.fn, compile_prime(*x.arg, std::move(c), table), table);
            },
            [&](const CoreTerm::Var& x) {
                c.rev_body.push_back(instr::Var{x.index});
                return std::move(c);
            },
            [&](const CoreTerm::Lit& x) {
                c.rev_body.push_back(instr::Lit{x.value});
                return std::move(c);
            },
            [&](const CoreTerm::Op& x) {
                c.rev_body.push_back(instr::Op{x.op});
                return compile_prime(*x.rhs, compile_prime(*x.lhs, std::move(c), table), table);
            },
            [&](const CoreTerm::If0& x) {
                CodeRef th = finish(compile_prime(*x.then_branch, c, table), table);
                CodeRef el = finish(compile_prime(*x.else_branch, std::move(c), table), table);
                return compile_prime(*x.cond, Building{{}, instr::Cond{th, el}}, table);
            },
            [&](const CoreTerm::At& x) {
                CodeRef body = finish(compile_prime(*x.body, Building{{}, instr::Ret{}}, table), table);
                c.rev_body.push_back(instr::Remote{body, x.node});
                return std::move(c);
            },
        },
        t.node);
}

}  // namespace

CodeRef CodeTable::intern(Code code) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i] == code) return CodeRef{static_cast<std::uint32_t>(i)};
    }
    entries.push_back(std::move(code));
    return CodeRef{static_cast<std::uint32_t>(entries.size() - 1)};
}

CodeRef compile_tail(const CoreTerm& t, CodeRef k, CodeTable& table) {
    Building b = from_code(table.at(k));
    return finish(compile_prime(t, std::move(b), table), table);
}

CodeTable compile(const CoreTerm& t) {
    if (std::size_t free = free_index_bound(t); free > 0) {
        throw CompileError("program is not closed: variable index " + std::to_string(free - 1) +
                           " is unbound at the top level");
    }
    auto violations = check_closed_at(t);
    if (!violations.empty()) throw CompileError(describe(violations.front()));
    CodeTable table;
    table.root = finish(compile_prime(t, Building{{}, instr::End{}}, table), table);
    return table;
}

std::size_t instruction_count(const CodeTable& table) {
    std::size_t n = 0;
    for (const auto& c : table.entries) n += c.body.size() + 1;
    return n;
}

std::vector<NodeName> remote_nodes(const CodeTable& table) {
    std::set<NodeName> seen;
    for (const auto& c : table.entries) {
        for (const auto& i : c.body) {
            if (const auto* r = std::get_if<instr::Remote>(&i)) seen.insert(r->node);
        }
    }
    return {seen.begin(), seen.end()};
}

// ---------------------------------------------------------------------------
// Text form

namespace {

void write_instr(std::ostream& os, const Instr& i) {
    std::visit(overloaded{
                   [&](const instr::Var& x) { os << "(var " << x.index << ")"; },
                   [&](const instr::Clos& x) { os << "(clos " << x.code.index << ")"; },
                   [&](const instr::Appl&) { os << "appl"; },
                   [&](const instr::Lit& x) { os << "(lit " << x.value << ")"; },
                   [&](const instr::Op& x) { os << "(op " << prim_symbol(x.op) << ")"; },
                   [&](const instr::Remote& x) { os << "(remote " << x.code.index << " " << x.node.str() << ")"; },
               },
               i);
}

void write_term(std::ostream& os, const Terminator& t) {
    std::visit(overloaded{
                   [&](const instr::End&) { os << "end"; },
                   [&](const instr::Ret&) { os << "ret"; },
                   [&](const instr::Cond& x) {
                       os << "(cond " << x.then_code.index << " " << x.else_code.index << ")";
                   },
               },
               t);
}

}  // namespace

std::string serialize(const CodeTable& table) {
    std::ostringstream os;
    os << "(table root " << table.root.index;
    for (const auto& c : table.entries) {
        os << "\n  (code";
        for (const auto& i : c.body) {
            os << ' ';
            write_instr(os, i);
        }
        os << ' ';
        write_term(os, c.term);
        os << ')';
    }
    os << ")\n";
    return os.str();
}

DeserializeError::DeserializeError(const std::string& msg, std::size_t offset)
    : InputError(offset ? "offset " + std::to_string(offset) + ": " + msg : msg), offset_(offset) {}

namespace {

// Offsets in errors are 1-based; end of input is reported as size + 1.
class Reader {
public:
    explicit Reader(std::string_view s) : s_(s) {}

    void skip_ws() {
        while (i_ < s_.size()) {
            char c = s_[i_];
            if (c == ';') {
                while (i_ < s_.size() && s_[i_] != '\n') ++i_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++i_;
            } else {
                break;
            }
        }
    }

    bool at_end() {
        skip_ws();
        return i_ >= s_.size();
    }

    char peek() {
        skip_ws();
        if (i_ >= s_.size()) fail("unexpected end of input");
        return s_[i_];
    }

    void expect_char(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++i_;
    }

    std::string atom() {
        skip_ws();
        if (i_ >= s_.size()) fail("unexpected end of input");
        std::size_t start = i_;
        while (i_ < s_.size() && s_[i_] != '(' && s_[i_] != ')' &&
               !std::isspace(static_cast<unsigned char>(s_[i_]))) {
            ++i_;
        }
        if (start == i_) fail("expected an atom");
        last_atom_ = start;
        return std::string(s_.substr(start, i_ - start));
    }

    std::uint64_t nat(std::uint64_t max = std::numeric_limits<std::uint64_t>::max()) {
        std::string a = atom();
        std::uint64_t v = 0;
        for (char c : a) {
            if (!std::isdigit(static_cast<unsigned char>(c))) fail_at(last_atom_, "expected a natural number");
            std::uint64_t d = static_cast<std::uint64_t>(c - '0');
            if (v > (max - d) / 10) fail_at(last_atom_, "number out of range");
            v = v * 10 + d;
        }
        return v;
    }

    void keyword(std::string_view kw) {
        std::size_t at = (skip_ws(), i_);
        if (atom() != kw) fail_at(at, "expected '" + std::string(kw) + "'");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw DeserializeError(msg, i_ + 1); }
    [[noreturn]] void fail_at(std::size_t at, const std::string& msg) const {
        throw DeserializeError(msg, at + 1);
    }

    std::size_t pos() const { return i_; }

private:
    std::string_view s_;
    std::size_t i_ = 0;
    std::size_t last_atom_ = 0;
};

struct RefUse {
    std::uint32_t ref;
    std::size_t offset;
};

Code read_code(Reader& r, std::vector<RefUse>& uses) {
    constexpr std::uint64_t ref_max = std::numeric_limits<std::uint32_t>::max();
    auto ref = [&]() {
        r.skip_ws();
        std::size_t at = r.pos();
        auto v = static_cast<std::uint32_t>(r.nat(ref_max));
        uses.push_back({v, at});
        return CodeRef{v};
    };
    r.expect_char('(');
    r.keyword("code");
    Code code;
    for (;;) {
        if (r.peek() == ')') r.fail("code is missing its terminator");
        if (r.peek() == '(') {
            std::size_t open = r.pos();
            r.expect_char('(');
            r.skip_ws();
            std::size_t head_at = r.pos();
            std::string head = r.atom();
            if (head == "cond") {
                CodeRef th = ref();
                CodeRef el = ref();
                r.expect_char(')');
                code.term = instr::Cond{th, el};
                break;
            }
            if (head == "var") {
                code.body.push_back(instr::Var{static_cast<std::size_t>(r.nat())});
            } else if (head == "clos") {
                code.body.push_back(instr::Clos{ref()});
            } else if (head == "lit") {
                code.body.push_back(instr::Lit{r.nat()});
            } else if (head == "op") {
                r.skip_ws();
                std::size_t at = r.pos();
                auto op = prim_from_symbol(r.atom());
                if (!op) r.fail_at(at, "unknown operator");
                code.body.push_back(instr::Op{*op});
            } else if (head == "remote") {
                CodeRef c = ref();
                r.skip_ws();
                std::size_t at = r.pos();
                std::string node = r.atom();
                if (!NodeName::is_valid(node)) r.fail_at(at, "invalid node name '" + node + "'");
                code.body.push_back(instr::Remote{c, NodeName(node)});
            } else {
                r.fail_at(head_at, "unknown instruction '" + head + "'");
            }
            (void)open;
            r.expect_char(')');
            continue;
        }
        r.skip_ws();
        std::size_t at = r.pos();
        std::string a = r.atom();
        if (a == "appl") {
            code.body.push_back(instr::Appl{});
        } else if (a == "end") {
            code.term = instr::End{};
            break;
        } else if (a == "ret") {
            code.term = instr::Ret{};
            break;
        } else {
            r.fail_at(at, "unknown instruction '" + a + "'");
        }
    }
    r.expect_char(')');
    return code;
}

std::vector<CodeRef> children(const Code& c) {
    std::vector<CodeRef> out;
    for (const auto& i : c.body) {
        if (const auto* x = std::get_if<instr::Clos>(&i)) out.push_back(x->code);
        if (const auto* x = std::get_if<instr::Remote>(&i)) out.push_back(x->code);
    }
    if (const auto* x = std::get_if<instr::Cond>(&c.term)) {
        out.push_back(x->then_code);
        out.push_back(x->else_code);
    }
    return out;
}

void check_acyclic(const CodeTable& t) {
    enum Mark : char { White, Grey, Black };
    std::vector<Mark> mark(t.entries.size(), White);
    std::function<void(std::uint32_t)> visit = [&](std::uint32_t i) {
        mark[i] = Grey;
        for (CodeRef c : children(t.entries[i])) {
            if (mark[c.index] == Grey) {
                throw DeserializeError("code reference cycle through entry " + std::to_string(c.index), 0);
            }
            if (mark[c.index] == White) visit(c.index);
        }
        mark[i] = Black;
    };
    for (std::uint32_t i = 0; i < t.entries.size(); ++i) {
        if (mark[i] == White) visit(i);
    }
}

}  // namespace

CodeTable deserialize(std::string_view text) {
    Reader r(text);
    CodeTable table;
    std::vector<RefUse> uses;
    std::size_t root_at = 0;
    std::uint32_t root = 0;

    r.expect_char('(');
    r.skip_ws();
    std::size_t head_at = r.pos();
    std::string head = r.atom();
    if (head == "table") {
        r.keyword("root");
        r.skip_ws();
        root_at = r.pos();
        root = static_cast<std::uint32_t>(r.nat(std::numeric_limits<std::uint32_t>::max()));
        while (r.peek() != ')') table.entries.push_back(read_code(r, uses));
        r.expect_char(')');
    } else if (head == "code") {
        Reader again(text);
        table.entries.push_back(read_code(again, uses));
        r = again;
    } else {
        r.fail_at(head_at, "expected 'table' or 'code'");
    }
    if (!r.at_end()) r.fail("trailing input after table");
    if (root >= table.entries.size()) r.fail_at(root_at, "root " + std::to_string(root) + " is not a table entry");
    for (const auto& u : uses) {
        if (u.ref >= table.entries.size()) {
            r.fail_at(u.offset, "code reference " + std::to_string(u.ref) + " is not a table entry");
        }
    }
    check_acyclic(table);
    table.root = CodeRef{root};
    return table;
}

// ---------------------------------------------------------------------------
// Pretty form

std::string show_instr(const Instr& i) {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const instr::Var& x) { os << "VAR " << x.index; },
                   [&](const instr::Clos& x) { os << "CLOS #" << x.code.index; },
                   [&](const instr::Appl&) { os << "APPL"; },
                   [&](const instr::Lit& x) { os << "LIT " << x.value; },
                   [&](const instr::Op& x) { os << "OP " << prim_symbol(x.op); },
                   [&](const instr::Remote& x) { os << "REMOTE #" << x.code.index << " " << x.node.str(); },
               },
               i);
    return os.str();
}

std::string show_code(const CodeTable& table, CodeRef r) {
    const Code& c = table.at(r);
    std::string out;
    for (const auto& i : c.body) {
        std::visit(overloaded{
                       [&](const instr::Clos& x) { out += "CLOS (" + show_code(table, x.code) + ")"; },
                       [&](const instr::Remote& x) {
                           out += "REMOTE (" + show_code(table, x.code) + ") " + x.node.str();
                       },
                       [&](const auto&) { out += show_instr(i); },
                   },
                   i);
        out += "; ";
    }
    std::visit(overloaded{
                   [&](const instr::End&) { out += "END"; },
                   [&](const instr::Ret&) { out += "RET"; },
                   [&](const instr::Cond& x) {
                       out += "COND (" + show_code(table, x.then_code) + ") (" + show_code(table, x.else_code) + ")";
                   },
               },
               c.term);
    return out;
}

}  // namespace dam
