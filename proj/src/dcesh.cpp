#include "dam/dcesh.hpp"

#include <sstream>

#include "dam/machine.hpp"

namespace dam {

namespace {

using Step = DceshSemantics::Step;

constexpr Rule kActiveRules[] = {Rule::Var,      Rule::Clos,       Rule::Appl,     Rule::Ret,
                                 Rule::Lit,      Rule::Op,         Rule::Cond0,    Rule::CondSucc,
                                 Rule::RemoteSend, Rule::ApplSend, Rule::RetSend};

const DValue* as_val(const DElem& e) { return std::get_if<DValue>(&e); }

const Nat* as_nat(const DElem& e) {
    const auto* v = as_val(e);
    return v ? std::get_if<Nat>(v) : nullptr;
}

Step silent(DMachine m, DThread t, Rule r) {
    m.thread = std::move(t);
    return Step{Silent<DMsg>{}, std::move(m), r};
}

Step send(DMachine m, DMsg msg, Rule r) {
    m.thread.reset();
    return Step{Send<DMsg>{std::move(msg)}, std::move(m), r};
}

std::optional<Step> fire(Rule rule, const NodeName& i, const DMachine& m, const CodeTable& table) {
    if (!m.thread) return std::nullopt;
    const DThread& th = *m.thread;
    const Terminator* term = nullptr;
    const Instr* ins = fetch(table, th.pc, &term);
    const auto& s = th.stack.elems;
    const auto& r = th.stack.bottom;
    switch (rule) {
        case Rule::Var: {
            const auto* x = ins ? std::get_if<instr::Var>(ins) : nullptr;
            if (!x) return std::nullopt;
            const DValue* v = th.env.at(x->index);
            if (!v) return std::nullopt;
            return silent(m, DThread{advance(th.pc), th.env, {s.push(*v), r}}, rule);
        }
        case Rule::Clos: {
            const auto* x = ins ? std::get_if<instr::Clos>(ins) : nullptr;
            if (!x) return std::nullopt;
            DMachine next = m;
            auto [heap, ptr] = m.clos_heap.alloc(DClosure{CodePos{x->code, 0}, th.env});
            next.clos_heap = std::move(heap);
            return silent(std::move(next), DThread{advance(th.pc), th.env, {s.push(DValue{RemotePtr{ptr, i}}), r}},
                          rule);
        }
        case Rule::Appl:
        case Rule::ApplSend: {
            if (!ins || !std::holds_alternative<instr::Appl>(*ins) || s.size() < 2) return std::nullopt;
            const DValue* v = as_val(s.front());
            const DValue* f = as_val(s.pop().front());
            const RemotePtr* cl = f ? std::get_if<RemotePtr>(f) : nullptr;
            if (!v || !cl) return std::nullopt;
            const auto& rest = s.pop().pop();
            if (rule == Rule::Appl) {
                if (cl->node != i) return std::nullopt;
                const DClosure* c = m.clos_heap.deref(cl->ptr);
                if (!c) return std::nullopt;
                return silent(m, DThread{c->code, c->env.push(*v), {rest.push(DCont{advance(th.pc), th.env}), r}},
                              rule);
            }
            if (cl->node == i) return std::nullopt;
            DMachine next = m;
            auto [heap, cnt] = m.cont_heap.alloc(DContCell{DCont{advance(th.pc), th.env}, DStack{rest, r}});
            next.cont_heap = std::move(heap);
            return send(std::move(next), dmsg::Appl{*cl, *v, RemotePtr{cnt, i}}, rule);
        }
        case Rule::Ret: {
            if (ins || !std::holds_alternative<instr::Ret>(*term) || s.size() < 2) return std::nullopt;
            const DValue* v = as_val(s.front());
            const auto* k = std::get_if<DCont>(&s.pop().front());
            if (!v || !k) return std::nullopt;
            return silent(m, DThread{k->code, k->env, {s.pop().pop().push(*v), r}}, rule);
        }
        case Rule::RetSend: {
            if (ins || !std::holds_alternative<instr::Ret>(*term) || s.size() != 1 || !r) return std::nullopt;
            const DValue* v = as_val(s.front());
            if (!v) return std::nullopt;
            return send(m, dmsg::Ret{*r, *v}, rule);
        }
        case Rule::Lit: {
            const auto* x = ins ? std::get_if<instr::Lit>(ins) : nullptr;
            if (!x) return std::nullopt;
            return silent(m, DThread{advance(th.pc), th.env, {s.push(DValue{x->value}), r}}, rule);
        }
        case Rule::Op: {
            const auto* x = ins ? std::get_if<instr::Op>(ins) : nullptr;
            if (!x || s.size() < 2) return std::nullopt;
            const Nat* n1 = as_nat(s.front());
            const Nat* n2 = as_nat(s.pop().front());
            if (!n1 || !n2) return std::nullopt;
            auto res = apply_prim(x->op, *n1, *n2);
            if (!res) return std::nullopt;
            return silent(m, DThread{advance(th.pc), th.env, {s.pop().pop().push(DValue{*res}), r}}, rule);
        }
        case Rule::Cond0:
        case Rule::CondSucc: {
            const auto* x = ins ? nullptr : std::get_if<instr::Cond>(term);
            if (!x || s.empty()) return std::nullopt;
            const Nat* n = as_nat(s.front());
            if (!n || (*n == 0) != (rule == Rule::Cond0)) return std::nullopt;
            return silent(m, DThread{CodePos{*n == 0 ? x->then_code : x->else_code, 0}, th.env, {s.pop(), r}}, rule);
        }
        case Rule::RemoteSend: {
            const auto* x = ins ? std::get_if<instr::Remote>(ins) : nullptr;
            if (!x) return std::nullopt;
            DMachine next = m;
            auto [heap, cnt] = m.cont_heap.alloc(DContCell{DCont{advance(th.pc), th.env}, th.stack});
            next.cont_heap = std::move(heap);
            return send(std::move(next), dmsg::Remote{x->code, x->node, RemotePtr{cnt, i}}, rule);
        }
        default:
            return std::nullopt;
    }
}

std::string show_dvalue(const DValue& v) {
    if (const auto* n = std::get_if<Nat>(&v)) return "nat " + std::to_string(*n);
    const auto& p = std::get<RemotePtr>(v);
    return "ptr " + std::to_string(p.ptr.index) + "@" + p.node.str();
}

std::string show_rptr(const RemotePtr& p) { return std::to_string(p.ptr.index) + "@" + p.node.str(); }

}  // namespace

NodeName route(const DMsg& msg) {
    if (const auto* x = std::get_if<dmsg::Remote>(&msg)) return x->target;
    if (const auto* x = std::get_if<dmsg::Appl>(&msg)) return x->clos.node;
    return std::get<dmsg::Ret>(msg).cont.node;
}

std::vector<Step> DceshSemantics::active_steps(const NodeName& i, const Machine& m) const {
    std::vector<Step> out;
    if (!m.thread) return out;
    for (Rule r : kActiveRules) {
        if (auto st = fire(r, i, m, *table_)) out.push_back(std::move(*st));
    }
    return out;
}

std::variant<Step, Refusal> DceshSemantics::receive(const NodeName& i, const Machine& m, const Msg& msg) const {
    if (m.thread) return Refusal{"a thread is running"};
    if (const auto* x = std::get_if<dmsg::Remote>(&msg)) {
        if (x->target != i) return Refusal{"addressed to " + x->target.str()};
        if (x->code.index >= table_->entries.size()) return Refusal{"unknown code reference"};
        DMachine next = m;
        next.thread = DThread{CodePos{x->code, 0}, {}, DStack{{}, x->cont}};
        return Step{Receive<DMsg>{msg}, std::move(next), Rule::RemoteReceive};
    }
    if (const auto* x = std::get_if<dmsg::Appl>(&msg)) {
        if (x->clos.node != i) return Refusal{"closure lives on " + x->clos.node.str()};
        const DClosure* c = m.clos_heap.deref(x->clos.ptr);
        if (!c) return Refusal{"dangling closure pointer " + show_rptr(x->clos)};
        DMachine next = m;
        next.thread = DThread{c->code, c->env.push(x->arg), DStack{{}, x->cont}};
        return Step{Receive<DMsg>{msg}, std::move(next), Rule::ApplReceive};
    }
    const auto& x = std::get<dmsg::Ret>(msg);
    if (x.cont.node != i) return Refusal{"continuation lives on " + x.cont.node.str()};
    const DContCell* k = m.cont_heap.deref(x.cont.ptr);
    if (!k) return Refusal{"dangling continuation pointer " + show_rptr(x.cont)};
    DMachine next = m;
    next.thread = DThread{k->cont.code, k->cont.env, DStack{k->stack.elems.push(x.value), k->stack.bottom}};
    return Step{Receive<DMsg>{msg}, std::move(next), Rule::RetReceive};
}

std::optional<DValue> DceshSemantics::halted(const SyncNet<Machine>& nodes) const {
    const DThread* only = nullptr;
    for (const auto& [_, m] : nodes) {
        if (!m.thread) continue;
        if (only) return std::nullopt;
        only = &*m.thread;
    }
    if (!only) return std::nullopt;
    const Terminator* term = nullptr;
    if (fetch(*table_, only->pc, &term) || !std::holds_alternative<instr::End>(*term)) return std::nullopt;
    if (!only->env.empty() || only->stack.elems.size() != 1 || only->stack.bottom) return std::nullopt;
    const DValue* v = as_val(only->stack.elems.front());
    if (!v) return std::nullopt;
    return *v;
}

std::string DceshSemantics::diagnose(const NodeName& i, const Machine& m) const {
    if (!m.thread) return "no thread";
    const DThread& th = *m.thread;
    const Terminator* term = nullptr;
    const Instr* ins = fetch(*table_, th.pc, &term);
    const auto& s = th.stack.elems;
    if (ins) {
        if (const auto* x = std::get_if<instr::Var>(ins)) {
            return "VAR " + std::to_string(x->index) + ": unbound (environment has " + std::to_string(th.env.size()) +
                   " entries)";
        }
        if (std::holds_alternative<instr::Appl>(*ins)) {
            if (s.size() >= 2) {
                const DValue* f = as_val(s.pop().front());
                const RemotePtr* cl = f ? std::get_if<RemotePtr>(f) : nullptr;
                if (cl && cl->node == i && !m.clos_heap.deref(cl->ptr)) {
                    return "APPL: dangling closure pointer " + show_rptr(*cl);
                }
            }
            return "APPL: expected an argument above a closure";
        }
        if (std::holds_alternative<instr::Op>(*ins)) return "OP: operands must be naturals without overflow";
        return "no rule applies to " + show_instr(*ins);
    }
    if (std::holds_alternative<instr::End>(*term)) return "END: expected an empty environment and one value";
    if (std::holds_alternative<instr::Ret>(*term)) return "RET: expected a value above a continuation";
    return "COND: guard must be a natural";
}

std::string DceshSemantics::summarize(const Msg& msg) const {
    if (const auto* x = std::get_if<dmsg::Remote>(&msg)) {
        return "REMOTE(code=" + std::to_string(x->code.index) + ",node=" + x->target.str() +
               ",cont=" + show_rptr(x->cont) + ")";
    }
    if (const auto* x = std::get_if<dmsg::Appl>(&msg)) {
        return "APPL(clos=" + show_rptr(x->clos) + ",arg=" + show_dvalue(x->arg) + ",cont=" + show_rptr(x->cont) + ")";
    }
    const auto& x = std::get<dmsg::Ret>(msg);
    return "RET(cont=" + show_rptr(x.cont) + ",value=" + show_dvalue(x.value) + ")";
}

void check_placement(const CodeTable& table, const NodeName& root, const std::set<NodeName>& nodes) {
    if (!nodes.count(root)) throw InputError("root node " + root.str() + " is not in the node set");
    for (const auto& n : remote_nodes(table)) {
        if (!nodes.count(n)) throw InputError("program places code on undeclared node " + n.str());
    }
}

DNet initial_network(const CodeTable& table, const NodeName& root, const std::set<NodeName>& nodes) {
    check_placement(table, root, nodes);
    DNet net;
    for (const auto& n : nodes) net.emplace(n, DMachine{});
    net.at(root).thread = DThread{CodePos{table.root, 0}, {}, {}};
    return net;
}

NetOutcome<DValue, DNet> run_dcesh_sync(const CodeTable& table, const NodeName& root, const std::set<NodeName>& nodes,
                                        std::uint64_t fuel, DSyncTrace* trace,
                                        const std::function<void(std::uint64_t, const SyncEvent<DMsg>&)>& observe) {
    DceshSemantics sem(table);
    auto halted = [&](const DNet& n) { return sem.halted(n); };
    return run_sync(initial_network(table, root, nodes), sem, fuel, halted, trace, observe);
}

NetOutcome<DValue, DAsyncNet> run_dcesh_async(
    const CodeTable& table, const NodeName& root, const std::set<NodeName>& nodes, std::uint64_t fuel,
    Scheduler sched, DAsyncTrace* trace, const std::function<void(std::uint64_t, const AsyncEvent<DMsg>&)>& observe) {
    DceshSemantics sem(table);
    auto halted = [&](const DNet& n) { return sem.halted(n); };
    return run_async(DAsyncNet{initial_network(table, root, nodes), {}}, sem, fuel, sched, halted, trace, observe);
}

std::string show_value(const DValue& v, const DNet& nodes) {
    if (const auto* n = std::get_if<Nat>(&v)) return "nat " + std::to_string(*n);
    const auto& p = std::get<RemotePtr>(v);
    auto it = nodes.find(p.node);
    const DClosure* c = it == nodes.end() ? nullptr : it->second.clos_heap.deref(p.ptr);
    if (!c) return "clos ptr=" + show_rptr(p) + " (dangling)";
    return "clos code=" + std::to_string(c->code.code.index) + " env=" + std::to_string(c->env.size()) +
           " at=" + p.node.str();
}

std::string show_heap_sizes(const DNet& nodes) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [name, m] : nodes) {
        if (!first) os << ' ';
        first = false;
        os << name.str() << ":clos=" << m.clos_heap.size() << ",cont=" << m.cont_heap.size();
    }
    return os.str();
}

std::set<NodeName> parse_node_list(const std::string& list) {
    std::set<NodeName> out;
    std::string cur;
    auto flush = [&]() {
        if (cur.empty()) throw InputError("empty node name in list '" + list + "'");
        out.insert(NodeName(cur));
        cur.clear();
    };
    for (char c : list) {
        if (c == ',') {
            flush();
        } else if (c != ' ') {
            cur += c;
        }
    }
    flush();
    return out;
}

}  // namespace dam
