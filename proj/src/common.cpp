#include "dam/common.hpp"

#include <cctype>
#include <limits>

namespace dam {

std::string_view prim_symbol(PrimOp op) {
    switch (op) {
        case PrimOp::Add:
            return "+";
        case PrimOp::Monus:
            return "-";
        case PrimOp::Mul:
            return "*";
    }
    return "?";
}

std::optional<PrimOp> prim_from_symbol(std::string_view sym) {
    if (sym == "+") return PrimOp::Add;
    if (sym == "-") return PrimOp::Monus;
    if (sym == "*") return PrimOp::Mul;
    return std::nullopt;
}

std::optional<Nat> apply_prim(PrimOp op, Nat lhs, Nat rhs) {
    constexpr Nat max = std::numeric_limits<Nat>::max();
    switch (op) {
        case PrimOp::Add:
            if (lhs > max - rhs) return std::nullopt;
            return lhs + rhs;
        case PrimOp::Monus:
            return lhs > rhs ? lhs - rhs : 0;
        case PrimOp::Mul:
            if (rhs != 0 && lhs > max / rhs) return std::nullopt;
            return lhs * rhs;
    }
    return std::nullopt;
}

NodeName::NodeName(std::string name) : name_(std::move(name)) {
    if (!is_valid(name_)) {
        throw InputError("invalid node name '" + name_ + "' (must start with an uppercase letter)");
    }
}

bool NodeName::is_valid(std::string_view name) {
    if (name.empty() || !std::isupper(static_cast<unsigned char>(name.front()))) return false;
    for (char c : name) {
        auto u = static_cast<unsigned char>(c);
        if (!std::isalnum(u) && c != '_') return false;
    }
    return true;
}

std::string_view rule_name(Rule rule) {
    switch (rule) {
        case Rule::Var: return "VAR";
        case Rule::Clos: return "CLOS";
        case Rule::Appl: return "APPL";
        case Rule::Ret: return "RET";
        case Rule::Lit: return "LIT";
        case Rule::Op: return "OP";
        case Rule::Cond0: return "COND-0";
        case Rule::CondSucc: return "COND-1+n";
        case Rule::Remote: return "REMOTE";
        case Rule::RemoteSend: return "REMOTE-send";
        case Rule::RemoteReceive: return "REMOTE-receive";
        case Rule::ApplSend: return "APPL-send";
        case Rule::ApplReceive: return "APPL-receive";
        case Rule::RetSend: return "RET-send";
        case Rule::RetReceive: return "RET-receive";
    }
    return "?";
}

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Halted: return "Halted";
        case Verdict::FuelExhausted: return "FuelExhausted";
        case Verdict::Stuck: return "Stuck";
    }
    return "?";
}

}  // namespace dam
