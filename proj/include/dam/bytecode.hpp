#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dam/common.hpp"
#include "dam/syntax.hpp"

namespace dam {

struct CodeRef {
    std::uint32_t index = 0;

    friend auto operator<=>(const CodeRef&, const CodeRef&) = default;
    friend bool operator==(const CodeRef&, const CodeRef&) = default;
};

namespace instr {
struct Var {
    std::size_t index;
    friend auto operator<=>(const Var&, const Var&) = default;
};
struct Clos {
    CodeRef code;
    friend auto operator<=>(const Clos&, const Clos&) = default;
};
struct Appl {
    friend auto operator<=>(const Appl&, const Appl&) = default;
};
struct Lit {
    Nat value;
    friend auto operator<=>(const Lit&, const Lit&) = default;
};
struct Op {
    PrimOp op;
    friend auto operator<=>(const Op&, const Op&) = default;
};
struct Remote {
    CodeRef code;
    NodeName node;
    friend auto operator<=>(const Remote&, const Remote&) = default;
};

struct End {
    friend auto operator<=>(const End&, const End&) = default;
};
struct Ret {
    friend auto operator<=>(const Ret&, const Ret&) = default;
};
struct Cond {
    CodeRef then_code;
    CodeRef else_code;
    friend auto operator<=>(const Cond&, const Cond&) = default;
};
}  // namespace instr

using Instr = std::variant<instr::Var, instr::Clos, instr::Appl, instr::Lit, instr::Op, instr::Remote>;
using Terminator = std::variant<instr::End, instr::Ret, instr::Cond>;

struct Code {
    std::vector<Instr> body;
    Terminator term;

    friend auto operator<=>(const Code&, const Code&) = default;
    friend bool operator==(const Code&, const Code&) = default;
};

// Dense, immutable after construction. Structurally equal fragments share an
// entry.
struct CodeTable {
    std::vector<Code> entries;
    CodeRef root;

    const Code& at(CodeRef r) const { return entries.at(r.index); }
    CodeRef intern(Code code);

    friend bool operator==(const CodeTable&, const CodeTable&) = default;
};

// A point inside a code fragment: the instruction at `offset`, or the
// terminator when offset == body.size().
struct CodePos {
    CodeRef code;
    std::uint32_t offset = 0;

    friend auto operator<=>(const CodePos&, const CodePos&) = default;
    friend bool operator==(const CodePos&, const CodePos&) = default;
};

class CompileError : public InputError {
public:
    using InputError::InputError;
};

// Compiles `t` in front of the code at `k`. Returns the new head.
CodeRef compile_tail(const CoreTerm& t, CodeRef k, CodeTable& table);

// Throws CompileError when an '@' body is open.
CodeTable compile(const CoreTerm& t);

std::size_t instruction_count(const CodeTable& table);

// Every node name mentioned by a REMOTE instruction.
std::vector<NodeName> remote_nodes(const CodeTable& table);

std::string serialize(const CodeTable& table);

class DeserializeError : public InputError {
public:
    DeserializeError(const std::string& msg, std::size_t offset);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Accepts `(table root N code...)` or a single bare `(code ...)`.
CodeTable deserialize(std::string_view text);

// Human-readable nested rendering, e.g.
// `CLOS (VAR 0; RET); CLOS (CLOS (VAR 1; RET); RET); APPL; END`.
std::string show_code(const CodeTable& table, CodeRef r);

std::string show_instr(const Instr& i);

}  // namespace dam
