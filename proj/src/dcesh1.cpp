#include "dam/dcesh1.hpp"

namespace dam {

namespace {

using Step = Dcesh1Semantics::Step;

constexpr Rule kActiveRules[] = {Rule::Var, Rule::Clos,  Rule::Lit,      Rule::Op,
                                 Rule::Cond0, Rule::CondSucc, Rule::ApplSend, Rule::RetSend};

Step silent(D1Machine m, D1Thread t, Rule r) {
    m.thread = std::move(t);
    return Step{Silent<D1Msg>{}, std::move(m), r};
}

std::optional<Step> fire(Rule rule, const D1Machine& m, const CodeTable& table) {
    if (!m.thread) return std::nullopt;
    const D1Thread& th = *m.thread;
    const Terminator* term = nullptr;
    const Instr* ins = fetch(table, th.pc, &term);
    const auto& s = th.stack.elems;
    switch (rule) {
        case Rule::Var: {
            const auto* x = ins ? std::get_if<instr::Var>(ins) : nullptr;
            if (!x) return std::nullopt;
            const D1Value* v = th.env.at(x->index);
            if (!v) return std::nullopt;
            return silent(m, D1Thread{advance(th.pc), th.env, {s.push(*v), th.stack.bottom}}, rule);
        }
        case Rule::Clos: {
            const auto* x = ins ? std::get_if<instr::Clos>(ins) : nullptr;
            if (!x) return std::nullopt;
            D1Machine next = m;
            auto [heap, ptr] = m.clos_heap.alloc(D1Closure{CodePos{x->code, 0}, th.env});
            next.clos_heap = std::move(heap);
            return silent(std::move(next), D1Thread{advance(th.pc), th.env, {s.push(D1Value{ptr}), th.stack.bottom}},
                          rule);
        }
        case Rule::Lit: {
            const auto* x = ins ? std::get_if<instr::Lit>(ins) : nullptr;
            if (!x) return std::nullopt;
            return silent(m, D1Thread{advance(th.pc), th.env, {s.push(D1Value{x->value}), th.stack.bottom}}, rule);
        }
        case Rule::Op: {
            const auto* x = ins ? std::get_if<instr::Op>(ins) : nullptr;
            if (!x || s.size() < 2) return std::nullopt;
            const Nat* n1 = std::get_if<Nat>(&s.front());
            const Nat* n2 = std::get_if<Nat>(&s.pop().front());
            if (!n1 || !n2) return std::nullopt;
            auto r = apply_prim(x->op, *n1, *n2);
            if (!r) return std::nullopt;
            return silent(m, D1Thread{advance(th.pc), th.env, {s.pop().pop().push(D1Value{*r}), th.stack.bottom}},
                          rule);
        }
        case Rule::Cond0:
        case Rule::CondSucc: {
            const auto* x = ins ? nullptr : std::get_if<instr::Cond>(term);
            if (!x || s.empty()) return std::nullopt;
            const Nat* n = std::get_if<Nat>(&s.front());
            if (!n || (*n == 0) != (rule == Rule::Cond0)) return std::nullopt;
            CodePos pc{*n == 0 ? x->then_code : x->else_code, 0};
            return silent(m, D1Thread{pc, th.env, {s.pop(), th.stack.bottom}}, rule);
        }
        case Rule::ApplSend: {
            if (!ins || !std::holds_alternative<instr::Appl>(*ins) || s.size() < 2) return std::nullopt;
            const D1Value& v = s.front();
            const Ptr* cl = std::get_if<Ptr>(&s.pop().front());
            if (!cl) return std::nullopt;
            D1Machine next = m;
            auto [heap, cnt] = m.cont_heap.alloc(D1ContCell{advance(th.pc), th.env, {s.pop().pop(), th.stack.bottom}});
            next.cont_heap = std::move(heap);
            next.thread.reset();
            return Step{Send<D1Msg>{d1msg::Appl{*cl, v, cnt}}, std::move(next), rule};
        }
        case Rule::RetSend: {
            if (ins || !std::holds_alternative<instr::Ret>(*term)) return std::nullopt;
            if (s.size() != 1 || !th.stack.bottom) return std::nullopt;
            D1Machine next = m;
            next.thread.reset();
            return Step{Send<D1Msg>{d1msg::Ret{*th.stack.bottom, s.front()}}, std::move(next), rule};
        }
        default:
            return std::nullopt;
    }
}

std::string show_d1value(const D1Value& v) {
    if (const auto* n = std::get_if<Nat>(&v)) return "nat " + std::to_string(*n);
    return "ptr " + std::to_string(std::get<Ptr>(v).index);
}

}  // namespace

std::vector<Step> Dcesh1Semantics::active_steps(const NodeName& i, const Machine& m) const {
    std::vector<Step> out;
    if (i != self_) return out;
    for (Rule r : kActiveRules) {
        if (auto st = fire(r, m, *table_)) out.push_back(std::move(*st));
    }
    return out;
}

std::variant<Step, Refusal> Dcesh1Semantics::receive(const NodeName& i, const Machine& m, const Msg& msg) const {
    if (i != self_) return Refusal{"not the addressed node"};
    if (m.thread) return Refusal{"a thread is running"};
    if (const auto* a = std::get_if<d1msg::Appl>(&msg)) {
        const D1Closure* cl = m.clos_heap.deref(a->clos);
        if (!cl) return Refusal{"dangling closure pointer " + std::to_string(a->clos.index)};
        D1Machine next = m;
        next.thread = D1Thread{cl->code, cl->env.push(a->arg), {{}, a->cont}};
        return Step{Receive<D1Msg>{msg}, std::move(next), Rule::ApplReceive};
    }
    const auto& r = std::get<d1msg::Ret>(msg);
    const D1ContCell* k = m.cont_heap.deref(r.cont);
    if (!k) return Refusal{"dangling continuation pointer " + std::to_string(r.cont.index)};
    D1Machine next = m;
    next.thread = D1Thread{k->code, k->env, {k->stack.elems.push(r.value), k->stack.bottom}};
    return Step{Receive<D1Msg>{msg}, std::move(next), Rule::RetReceive};
}

std::optional<D1Value> Dcesh1Semantics::halted(const Machine& m) const {
    if (!m.thread) return std::nullopt;
    const D1Thread& th = *m.thread;
    const Terminator* term = nullptr;
    if (fetch(*table_, th.pc, &term) || !std::holds_alternative<instr::End>(*term)) return std::nullopt;
    if (!th.env.empty() || th.stack.elems.size() != 1 || th.stack.bottom) return std::nullopt;
    return th.stack.elems.front();
}

std::string Dcesh1Semantics::diagnose(const NodeName&, const Machine& m) const {
    if (!m.thread) return "no thread";
    const D1Thread& th = *m.thread;
    const Terminator* term = nullptr;
    const Instr* ins = fetch(*table_, th.pc, &term);
    if (ins) {
        if (const auto* x = std::get_if<instr::Var>(ins)) {
            return "VAR " + std::to_string(x->index) + ": unbound (environment has " + std::to_string(th.env.size()) +
                   " entries)";
        }
        if (std::holds_alternative<instr::Remote>(*ins)) return "REMOTE is not supported on this machine";
        if (std::holds_alternative<instr::Appl>(*ins)) return "APPL: expected an argument above a closure";
        if (std::holds_alternative<instr::Op>(*ins)) return "OP: operands must be naturals without overflow";
        return "no rule applies to " + show_instr(*ins);
    }
    if (std::holds_alternative<instr::End>(*term)) return "END: expected an empty environment and one value";
    if (std::holds_alternative<instr::Ret>(*term)) return "RET: expected one value over a continuation pointer";
    return "COND: guard must be a natural";
}

std::string Dcesh1Semantics::summarize(const Msg& msg) const {
    if (const auto* a = std::get_if<d1msg::Appl>(&msg)) {
        return "APPL(clos=" + std::to_string(a->clos.index) + ",arg=" + show_d1value(a->arg) +
               ",cont=" + std::to_string(a->cont.index) + ")";
    }
    const auto& r = std::get<d1msg::Ret>(msg);
    return "RET(cont=" + std::to_string(r.cont.index) + ",value=" + show_d1value(r.value) + ")";
}

const NodeName& dcesh1_node() {
    static const NodeName a("A");
    return a;
}

D1Machine dcesh1_initial(const CodeTable& table) {
    D1Machine m;
    m.thread = D1Thread{CodePos{table.root, 0}, {}, {}};
    return m;
}

D1Outcome run_dcesh1(const CodeTable& table, std::uint64_t fuel, Scheduler sched, AsyncTrace<D1Machine, D1Msg>* trace,
                     const std::function<void(std::uint64_t, const AsyncEvent<D1Msg>&)>& observe) {
    if (!remote_nodes(table).empty()) {
        throw InputError("the single-node machine cannot run programs that contain REMOTE");
    }
    Dcesh1Semantics sem(table, dcesh1_node());
    D1Net net;
    net.nodes.emplace(dcesh1_node(), dcesh1_initial(table));
    auto halted = [&](const SyncNet<D1Machine>& nodes) { return sem.halted(nodes.at(dcesh1_node())); };
    return run_async(std::move(net), sem, fuel, sched, halted, trace, observe);
}

std::string show_value(const D1Value& v, const D1Machine& m) { return show_value(v, m.clos_heap); }

}  // namespace dam
