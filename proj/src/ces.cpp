#include "dam/ces.hpp"

namespace dam {

namespace {

const Nat* as_nat(const CesElem& e) {
    const auto* v = std::get_if<CesValue>(&e);
    return v ? std::get_if<Nat>(v) : nullptr;
}

const CesValue* as_val(const CesElem& e) { return std::get_if<CesValue>(&e); }

constexpr Rule kRules[] = {Rule::Var, Rule::Clos, Rule::Appl, Rule::Ret,    Rule::Lit,
                           Rule::Op,  Rule::Cond0, Rule::CondSucc, Rule::Remote};

// One rule of the transition relation, tried in isolation.
std::optional<CesConfig> fire(Rule rule, const CesConfig& cfg, const CodeTable& table) {
    const Terminator* term = nullptr;
    const Instr* ins = fetch(table, cfg.pc, &term);
    const auto& s = cfg.stack;
    switch (rule) {
        case Rule::Var: {
            const auto* x = ins ? std::get_if<instr::Var>(ins) : nullptr;
            if (!x) return std::nullopt;
            const CesValue* v = cfg.env.at(x->index);
            if (!v) return std::nullopt;
            return CesConfig{advance(cfg.pc), cfg.env, s.push(*v)};
        }
        case Rule::Clos: {
            const auto* x = ins ? std::get_if<instr::Clos>(ins) : nullptr;
            if (!x) return std::nullopt;
            auto cl = std::make_shared<const CesClosure>(CesClosure{CodePos{x->code, 0}, cfg.env});
            return CesConfig{advance(cfg.pc), cfg.env, s.push(CesValue{std::move(cl)})};
        }
        case Rule::Appl: {
            if (!ins || !std::holds_alternative<instr::Appl>(*ins) || s.size() < 2) return std::nullopt;
            const CesValue* v = as_val(s.front());
            const CesValue* f = as_val(s.pop().front());
            const auto* cl = f ? std::get_if<std::shared_ptr<const CesClosure>>(f) : nullptr;
            if (!v || !cl) return std::nullopt;
            return CesConfig{(*cl)->code, (*cl)->env.push(*v), s.pop().pop().push(CesCont{advance(cfg.pc), cfg.env})};
        }
        case Rule::Ret: {
            if (ins || !std::holds_alternative<instr::Ret>(*term) || s.size() < 2) return std::nullopt;
            const CesValue* v = as_val(s.front());
            const auto* k = std::get_if<CesCont>(&s.pop().front());
            if (!v || !k) return std::nullopt;
            return CesConfig{k->code, k->env, s.pop().pop().push(*v)};
        }
        case Rule::Lit: {
            const auto* x = ins ? std::get_if<instr::Lit>(ins) : nullptr;
            if (!x) return std::nullopt;
            return CesConfig{advance(cfg.pc), cfg.env, s.push(CesValue{x->value})};
        }
        case Rule::Op: {
            const auto* x = ins ? std::get_if<instr::Op>(ins) : nullptr;
            if (!x || s.size() < 2) return std::nullopt;
            const Nat* n1 = as_nat(s.front());
            const Nat* n2 = as_nat(s.pop().front());
            if (!n1 || !n2) return std::nullopt;
            auto r = apply_prim(x->op, *n1, *n2);
            if (!r) return std::nullopt;
            return CesConfig{advance(cfg.pc), cfg.env, s.pop().pop().push(CesValue{*r})};
        }
        case Rule::Cond0:
        case Rule::CondSucc: {
            const auto* x = ins ? nullptr : std::get_if<instr::Cond>(term);
            if (!x || s.empty()) return std::nullopt;
            const Nat* n = as_nat(s.front());
            if (!n || (*n == 0) != (rule == Rule::Cond0)) return std::nullopt;
            return CesConfig{CodePos{*n == 0 ? x->then_code : x->else_code, 0}, cfg.env, s.pop()};
        }
        case Rule::Remote: {
            const auto* x = ins ? std::get_if<instr::Remote>(ins) : nullptr;
            if (!x) return std::nullopt;
            return CesConfig{CodePos{x->code, 0}, {}, s.push(CesCont{advance(cfg.pc), cfg.env})};
        }
        default:
            return std::nullopt;
    }
}

std::optional<CesValue> halted(const CesConfig& cfg, const CodeTable& table) {
    const Terminator* term = nullptr;
    if (fetch(table, cfg.pc, &term) || !std::holds_alternative<instr::End>(*term)) return std::nullopt;
    if (!cfg.env.empty() || cfg.stack.size() != 1) return std::nullopt;
    if (const auto* v = as_val(cfg.stack.front())) return *v;
    return std::nullopt;
}

std::string stuck_reason(const CesConfig& cfg, const CodeTable& table) {
    const Terminator* term = nullptr;
    const Instr* ins = fetch(table, cfg.pc, &term);
    const auto& s = cfg.stack;
    if (ins) {
        if (const auto* x = std::get_if<instr::Var>(ins)) {
            return "VAR " + std::to_string(x->index) + ": unbound (environment has " + std::to_string(cfg.env.size()) +
                   " entries)";
        }
        if (std::holds_alternative<instr::Appl>(*ins)) {
            if (s.size() < 2) return "APPL: stack holds fewer than two elements";
            return "APPL: expected an argument above a closure";
        }
        if (std::holds_alternative<instr::Op>(*ins)) {
            if (s.size() < 2) return "OP: stack holds fewer than two elements";
            if (!as_nat(s.front()) || !as_nat(s.pop().front())) return "OP: operands must be naturals";
            return "OP: arithmetic overflow";
        }
        return "no rule applies to " + show_instr(*ins);
    }
    if (std::holds_alternative<instr::End>(*term)) return "END: expected an empty environment and one value";
    if (std::holds_alternative<instr::Ret>(*term)) return "RET: expected a value above a continuation";
    if (s.empty()) return "COND: empty stack";
    return "COND: guard must be a natural";
}

}  // namespace

CesConfig ces_initial(const CodeTable& table) { return CesConfig{CodePos{table.root, 0}, {}, {}}; }

std::vector<std::pair<Rule, CesConfig>> enumerate_ces_successors(const CesConfig& cfg, const CodeTable& table) {
    std::vector<std::pair<Rule, CesConfig>> out;
    for (Rule r : kRules) {
        if (auto next = fire(r, cfg, table)) out.emplace_back(r, std::move(*next));
    }
    return out;
}

CesStep step_ces(CesConfig cfg, const CodeTable& table) {
    auto succ = enumerate_ces_successors(cfg, table);
    if (succ.size() == 1) return Next<CesConfig>{std::move(succ.front().second), succ.front().first};
    if (succ.size() > 1) return Stuck{"more than one rule applies"};
    if (auto v = halted(cfg, table)) return Halt<CesValue>{std::move(*v)};
    return Stuck{stuck_reason(cfg, table)};
}

CesOutcome run_ces(const CodeTable& table, std::uint64_t fuel,
                   const std::function<void(std::uint64_t, Rule, const CesConfig&)>& observe) {
    return run_machine<CesConfig, CesValue>(
        ces_initial(table), fuel, [&](const CesConfig& c) { return step_ces(c, table); }, observe);
}

std::string show_value(const CesValue& v) {
    if (const auto* n = std::get_if<Nat>(&v)) return "nat " + std::to_string(*n);
    const auto& cl = std::get<std::shared_ptr<const CesClosure>>(v);
    return "clos code=" + std::to_string(cl->code.code.index) + " env=" + std::to_string(cl->env.size());
}

}  // namespace dam
