#include "dam/cesh.hpp"

#include <sstream>

namespace dam {

namespace {

const Nat* as_nat(const CeshElem& e) {
    const auto* v = std::get_if<CeshValue>(&e);
    return v ? std::get_if<Nat>(v) : nullptr;
}

const CeshValue* as_val(const CeshElem& e) { return std::get_if<CeshValue>(&e); }

constexpr Rule kRules[] = {Rule::Var, Rule::Clos, Rule::Appl, Rule::Ret,    Rule::Lit,
                           Rule::Op,  Rule::Cond0, Rule::CondSucc, Rule::Remote};

std::optional<CeshConfig> fire(Rule rule, const CeshConfig& cfg, const CodeTable& table) {
    const Terminator* term = nullptr;
    const Instr* ins = fetch(table, cfg.pc, &term);
    const auto& s = cfg.stack;
    switch (rule) {
        case Rule::Var: {
            const auto* x = ins ? std::get_if<instr::Var>(ins) : nullptr;
            if (!x) return std::nullopt;
            const CeshValue* v = cfg.env.at(x->index);
            if (!v) return std::nullopt;
            return CeshConfig{advance(cfg.pc), cfg.env, s.push(*v), cfg.heap};
        }
        case Rule::Clos: {
            const auto* x = ins ? std::get_if<instr::Clos>(ins) : nullptr;
            if (!x) return std::nullopt;
            auto [heap, ptr] = cfg.heap.alloc(CeshClosure{CodePos{x->code, 0}, cfg.env});
            return CeshConfig{advance(cfg.pc), cfg.env, s.push(CeshValue{ptr}), std::move(heap)};
        }
        case Rule::Appl: {
            if (!ins || !std::holds_alternative<instr::Appl>(*ins) || s.size() < 2) return std::nullopt;
            const CeshValue* v = as_val(s.front());
            const CeshValue* f = as_val(s.pop().front());
            const Ptr* p = f ? std::get_if<Ptr>(f) : nullptr;
            if (!v || !p) return std::nullopt;
            const CeshClosure* cl = cfg.heap.deref(*p);
            if (!cl) return std::nullopt;
            return CeshConfig{cl->code, cl->env.push(*v), s.pop().pop().push(CeshCont{advance(cfg.pc), cfg.env}),
                              cfg.heap};
        }
        case Rule::Ret: {
            if (ins || !std::holds_alternative<instr::Ret>(*term) || s.size() < 2) return std::nullopt;
            const CeshValue* v = as_val(s.front());
            const auto* k = std::get_if<CeshCont>(&s.pop().front());
            if (!v || !k) return std::nullopt;
            return CeshConfig{k->code, k->env, s.pop().pop().push(*v), cfg.heap};
        }
        case Rule::Lit: {
            const auto* x = ins ? std::get_if<instr::Lit>(ins) : nullptr;
            if (!x) return std::nullopt;
            return CeshConfig{advance(cfg.pc), cfg.env, s.push(CeshValue{x->value}), cfg.heap};
        }
        case Rule::Op: {
            const auto* x = ins ? std::get_if<instr::Op>(ins) : nullptr;
            if (!x || s.size() < 2) return std::nullopt;
            const Nat* n1 = as_nat(s.front());
            const Nat* n2 = as_nat(s.pop().front());
            if (!n1 || !n2) return std::nullopt;
            auto r = apply_prim(x->op, *n1, *n2);
            if (!r) return std::nullopt;
            return CeshConfig{advance(cfg.pc), cfg.env, s.pop().pop().push(CeshValue{*r}), cfg.heap};
        }
        case Rule::Cond0:
        case Rule::CondSucc: {
            const auto* x = ins ? nullptr : std::get_if<instr::Cond>(term);
            if (!x || s.empty()) return std::nullopt;
            const Nat* n = as_nat(s.front());
            if (!n || (*n == 0) != (rule == Rule::Cond0)) return std::nullopt;
            return CeshConfig{CodePos{*n == 0 ? x->then_code : x->else_code, 0}, cfg.env, s.pop(), cfg.heap};
        }
        case Rule::Remote: {
            const auto* x = ins ? std::get_if<instr::Remote>(ins) : nullptr;
            if (!x) return std::nullopt;
            return CeshConfig{CodePos{x->code, 0}, {}, s.push(CeshCont{advance(cfg.pc), cfg.env}), cfg.heap};
        }
        default:
            return std::nullopt;
    }
}

std::optional<CeshValue> halted(const CeshConfig& cfg, const CodeTable& table) {
    const Terminator* term = nullptr;
    if (fetch(table, cfg.pc, &term) || !std::holds_alternative<instr::End>(*term)) return std::nullopt;
    if (!cfg.env.empty() || cfg.stack.size() != 1) return std::nullopt;
    if (const auto* v = as_val(cfg.stack.front())) return *v;
    return std::nullopt;
}

std::string stuck_reason(const CeshConfig& cfg, const CodeTable& table) {
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
            const CeshValue* f = as_val(s.pop().front());
            const Ptr* p = f ? std::get_if<Ptr>(f) : nullptr;
            if (p && as_val(s.front()) && !cfg.heap.deref(*p)) {
                return "APPL: dangling closure pointer " + std::to_string(p->index);
            }
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

std::string show_env(const CeshEnv& env) {
    std::string out = "(";
    bool first = true;
    for (const auto& v : env) {
        if (!first) out += ' ';
        first = false;
        if (const auto* n = std::get_if<Nat>(&v)) {
            out += "(nat " + std::to_string(*n) + ")";
        } else {
            out += "(ptr " + std::to_string(std::get<Ptr>(v).index) + ")";
        }
    }
    return out + ")";
}

}  // namespace

CeshConfig cesh_initial(const CodeTable& table) { return CeshConfig{CodePos{table.root, 0}, {}, {}, {}}; }

std::vector<std::pair<Rule, CeshConfig>> enumerate_cesh_successors(const CeshConfig& cfg, const CodeTable& table) {
    std::vector<std::pair<Rule, CeshConfig>> out;
    for (Rule r : kRules) {
        if (auto next = fire(r, cfg, table)) out.emplace_back(r, std::move(*next));
    }
    return out;
}

CeshStep step_cesh(CeshConfig cfg, const CodeTable& table) {
    auto succ = enumerate_cesh_successors(cfg, table);
    if (succ.size() == 1) return Next<CeshConfig>{std::move(succ.front().second), succ.front().first};
    if (succ.size() > 1) return Stuck{"more than one rule applies"};
    if (auto v = halted(cfg, table)) return Halt<CeshValue>{std::move(*v)};
    return Stuck{stuck_reason(cfg, table)};
}

CeshOutcome run_cesh(const CodeTable& table, std::uint64_t fuel,
                     const std::function<void(std::uint64_t, Rule, const CeshConfig&)>& observe) {
    return run_machine<CeshConfig, CeshValue>(
        cesh_initial(table), fuel, [&](const CeshConfig& c) { return step_cesh(c, table); }, observe);
}

std::string show_value(const CeshValue& v, const Heap<CeshClosure>& heap) {
    if (const auto* n = std::get_if<Nat>(&v)) return "nat " + std::to_string(*n);
    Ptr p = std::get<Ptr>(v);
    const CeshClosure* cl = heap.deref(p);
    if (!cl) return "clos ptr=" + std::to_string(p.index) + " (dangling)";
    return "clos code=" + std::to_string(cl->code.code.index) + " env=" + std::to_string(cl->env.size());
}

std::string dump_heap(const Heap<CeshClosure>& heap) {
    std::ostringstream os;
    for (std::size_t i = 0; i < heap.size(); ++i) {
        const auto& cl = heap[i];
        os << "(cell " << i << " (clos " << cl.code.code.index << ' ' << show_env(cl.env) << "))\n";
    }
    return os.str();
}

}  // namespace dam
