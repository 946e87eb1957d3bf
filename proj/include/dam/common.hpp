#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dam {

// Naturals are 64-bit unsigned; Add/Mul overflow is a runtime error.
using Nat = std::uint64_t;

enum class PrimOp { Add, Monus, Mul };

std::string_view prim_symbol(PrimOp op);
std::optional<PrimOp> prim_from_symbol(std::string_view sym);

// Applies a primitive to two naturals. `lhs` is the value nearer the stack
// top. Returns nullopt on 64-bit overflow.
std::optional<Nat> apply_prim(PrimOp op, Nat lhs, Nat rhs);

// Identifier of a node in the simulated network. Always starts with an
// uppercase ASCII letter.
class NodeName {
public:
    NodeName() = default;
    explicit NodeName(std::string name);

    static bool is_valid(std::string_view name);

    const std::string& str() const { return name_; }

    friend auto operator<=>(const NodeName&, const NodeName&) = default;
    friend bool operator==(const NodeName&, const NodeName&) = default;

private:
    std::string name_;
};

// Transition rule labels shared by every machine. Each machine uses the
// subset that appears in its transition relation.
enum class Rule {
    Var,
    Clos,
    Appl,
    Ret,
    Lit,
    Op,
    Cond0,
    CondSucc,
    Remote,
    RemoteSend,
    RemoteReceive,
    ApplSend,
    ApplReceive,
    RetSend,
    RetReceive,
};

std::string_view rule_name(Rule rule);

enum class Verdict { Halted, FuelExhausted, Stuck };

std::string_view verdict_name(Verdict v);

// Result of running a machine to completion or until its fuel runs out.
template <class Value, class Config>
struct Outcome {
    Verdict verdict = Verdict::Stuck;
    std::optional<Value> value;  // present iff verdict == Halted
    std::uint64_t steps = 0;
    std::string reason;  // stuck reason
    Config last;
};

// Raised for malformed user input: source text, bytecode files, node lists.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dam

template <>
struct std::hash<dam::NodeName> {
    std::size_t operator()(const dam::NodeName& n) const noexcept {
        return std::hash<std::string>{}(n.str());
    }
};
