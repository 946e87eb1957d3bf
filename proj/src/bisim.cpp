#include "dam/bisim.hpp"

#include <random>

namespace dam {

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

template <class T>
void keep_alive(RelationMemo& memo, const T& x) {
    memo.keep.push_back(std::make_shared<const T>(x));
}

// ---------------------------------------------------------------------------
// Reference evaluator

struct EvalStuck {
    std::string reason;
};

// Big-step evaluation with the pending work kept on an explicit stack, so
// deep programs do not exhaust the native stack.
class Evaluator {
public:
    Evaluator(std::uint64_t fuel, std::size_t max_depth) : fuel_(fuel), max_depth_(max_depth) {}

    std::uint64_t used() const { return used_; }

    // nullopt when fuel or depth runs out.
    std::optional<RefValue> run(const CoreTerm& root) {
        struct Eval {
            const CoreTerm* term;
            RefEnv env;
        };
        std::optional<Eval> next = Eval{&root, RefEnv{}};
        RefValue result;
        for (;;) {
            if (next) {
                if (used_ == fuel_ || frames_.size() > max_depth_) return std::nullopt;
                ++used_;
                const CoreTerm& t = *next->term;
                RefEnv env = std::move(next->env);
                next.reset();
                if (const auto* x = std::get_if<CoreTerm::Lam>(&t.node)) {
                    result = std::make_shared<const RefClosure>(RefClosure{x->body, env});
                } else if (const auto* x = std::get_if<CoreTerm::App>(&t.node)) {
                    frames_.push_back(ArgNext{x->arg.get(), env});
                    next = Eval{x->fn.get(), std::move(env)};
                    continue;
                } else if (const auto* x = std::get_if<CoreTerm::Var>(&t.node)) {
                    const RefValue* v = env.at(x->index);
                    if (!v) throw EvalStuck{"unbound variable " + std::to_string(x->index)};
                    result = *v;
                } else if (const auto* x = std::get_if<CoreTerm::Lit>(&t.node)) {
                    result = x->value;
                } else if (const auto* x = std::get_if<CoreTerm::Op>(&t.node)) {
                    frames_.push_back(LhsNext{x->op, x->lhs.get(), env});
                    next = Eval{x->rhs.get(), std::move(env)};
                    continue;
                } else if (const auto* x = std::get_if<CoreTerm::If0>(&t.node)) {
                    frames_.push_back(Branch{x->then_branch.get(), x->else_branch.get(), env});
                    next = Eval{x->cond.get(), std::move(env)};
                    continue;
                } else {
                    const auto& at = std::get<CoreTerm::At>(t.node);
                    next = Eval{at.body.get(), RefEnv{}};
                    continue;
                }
            }
            // `result` holds a value; hand it to the innermost frame.
            if (frames_.empty()) return result;
            Frame f = std::move(frames_.back());
            frames_.pop_back();
            if (auto* a = std::get_if<ArgNext>(&f)) {
                frames_.push_back(Apply{result});
                next = Eval{a->arg, std::move(a->env)};
            } else if (auto* a = std::get_if<Apply>(&f)) {
                const auto* cl = std::get_if<std::shared_ptr<const RefClosure>>(&a->fn);
                if (!cl) throw EvalStuck{"application of a non-function"};
                next = Eval{(*cl)->body.get(), (*cl)->env.push(result)};
            } else if (auto* l = std::get_if<LhsNext>(&f)) {
                frames_.push_back(Combine{l->op, result});
                next = Eval{l->lhs, std::move(l->env)};
            } else if (auto* c = std::get_if<Combine>(&f)) {
                const Nat* n1 = std::get_if<Nat>(&result);
                const Nat* n2 = std::get_if<Nat>(&c->rhs);
                if (!n1 || !n2) throw EvalStuck{"arithmetic on a non-natural"};
                auto r = apply_prim(c->op, *n1, *n2);
                if (!r) throw EvalStuck{"arithmetic overflow"};
                result = *r;
            } else {
                auto& b = std::get<Branch>(f);
                const Nat* n = std::get_if<Nat>(&result);
                if (!n) throw EvalStuck{"conditional on a non-natural"};
                next = Eval{*n == 0 ? b.then_branch : b.else_branch, std::move(b.env)};
            }
        }
    }

private:
    struct ArgNext {
        const CoreTerm* arg;
        RefEnv env;
    };
    struct Apply {
        RefValue fn;
    };
    struct LhsNext {
        PrimOp op;
        const CoreTerm* lhs;
        RefEnv env;
    };
    struct Combine {
        PrimOp op;
        RefValue rhs;
    };
    struct Branch {
        const CoreTerm* then_branch;
        const CoreTerm* else_branch;
        RefEnv env;
    };
    using Frame = std::variant<ArgNext, Apply, LhsNext, Combine, Branch>;

    std::uint64_t fuel_;
    std::size_t max_depth_;
    std::uint64_t used_ = 0;
    std::vector<Frame> frames_;
};

// ---------------------------------------------------------------------------
// R_Cfg

class CfgRelation {
public:
    CfgRelation(const Heap<CeshClosure>& heap, RelationMemo& memo) : heap_(heap), memo_(memo) {}

    bool value(const CesValue& a, const CeshValue& b) {
        if (const auto* n = std::get_if<Nat>(&a)) {
            const Nat* m = std::get_if<Nat>(&b);
            return m && *n == *m;
        }
        const auto& cl = std::get<std::shared_ptr<const CesClosure>>(a);
        const Ptr* p = std::get_if<Ptr>(&b);
        if (!p) return false;
        auto key = std::make_pair(cl.get(), p->index);
        if (memo_.cfg_clos.count(key)) return true;
        const CeshClosure* c2 = heap_.deref(*p);
        if (!c2 || !(cl->code == c2->code) || !env(cl->env, c2->env)) return false;
        memo_.cfg_clos.insert(key);
        memo_.keep.push_back(cl);
        return true;
    }

    bool env(const CesEnv& a, const CeshEnv& b) {
        if (a.size() != b.size()) return false;
        auto key = std::make_pair(a.id(), b.id());
        if (a.empty() || memo_.cfg_lists.count(key)) return true;
        auto i = a.begin();
        auto j = b.begin();
        for (; i != a.end(); ++i, ++j) {
            if (!value(*i, *j)) return false;
        }
        memo_.cfg_lists.insert(key);
        keep_alive(memo_, a);
        keep_alive(memo_, b);
        return true;
    }

    bool stack(const List<CesElem>& a, const List<CeshElem>& b) {
        if (a.size() != b.size()) return false;
        auto key = std::make_pair(a.id(), b.id());
        if (a.empty() || memo_.cfg_lists.count(key)) return true;
        const List<CesElem>* x = &a;
        const List<CeshElem>* y = &b;
        while (!x->empty()) {
            if (memo_.cfg_lists.count({x->id(), y->id()})) break;
            const auto& e1 = x->front();
            const auto& e2 = y->front();
            if (const auto* v1 = std::get_if<CesValue>(&e1)) {
                const auto* v2 = std::get_if<CeshValue>(&e2);
                if (!v2 || !value(*v1, *v2)) return false;
            } else {
                const auto& k1 = std::get<CesCont>(e1);
                const auto* k2 = std::get_if<CeshCont>(&e2);
                if (!k2 || !(k1.code == k2->code) || !env(k1.env, k2->env)) return false;
            }
            x = &x->pop();
            y = &y->pop();
        }
        memo_.cfg_lists.insert(key);
        keep_alive(memo_, a);
        keep_alive(memo_, b);
        return true;
    }

private:
    const Heap<CeshClosure>& heap_;
    RelationMemo& memo_;
};

// ---------------------------------------------------------------------------
// R_Sync

class SyncRelation {
public:
    SyncRelation(const Heap<CeshClosure>& heap, const DNet& net, RelationMemo& memo)
        : heap_(heap), net_(net), memo_(memo) {}

    bool rptr(std::size_t rank, Ptr p, const RemotePtr& rp) {
        if (rank == 0) return true;
        auto key = std::make_tuple(rank, p.index, rp.ptr.index, rp.node.str());
        if (auto it = memo_.sync_ptr.find(key); it != memo_.sync_ptr.end()) return it->second;
        bool ok = false;
        const CeshClosure* c1 = heap_.deref(p);
        auto node = net_.find(rp.node);
        const DClosure* c2 = node == net_.end() ? nullptr : node->second.clos_heap.deref(rp.ptr);
        if (c1 && c2 && c1->code == c2->code) ok = env(rank - 1, c1->env, c2->env);
        memo_.sync_ptr.emplace(key, ok);
        return ok;
    }

    bool value(std::size_t rank, const CeshValue& a, const DValue& b) {
        if (const auto* n = std::get_if<Nat>(&a)) {
            const Nat* m = std::get_if<Nat>(&b);
            return m && *n == *m;
        }
        const auto* rp = std::get_if<RemotePtr>(&b);
        return rp && rptr(rank, std::get<Ptr>(a), *rp);
    }

    bool env(std::size_t rank, const CeshEnv& a, const DEnv& b) {
        if (a.size() != b.size()) return false;
        auto key = std::make_tuple(rank, a.id(), b.id());
        if (a.empty() || memo_.sync_envs.count(key)) return true;
        auto i = a.begin();
        auto j = b.begin();
        for (; i != a.end(); ++i, ++j) {
            if (!value(rank, *i, *j)) return false;
        }
        memo_.sync_envs.insert(key);
        keep_alive(memo_, a);
        keep_alive(memo_, b);
        return true;
    }

    bool elem(std::size_t rank, const CeshElem& a, const DElem& b) {
        if (const auto* v1 = std::get_if<CeshValue>(&a)) {
            const auto* v2 = std::get_if<DValue>(&b);
            return v2 && value(rank, *v1, *v2);
        }
        const auto& k1 = std::get<CeshCont>(a);
        const auto* k2 = std::get_if<DCont>(&b);
        return k2 && k1.code == k2->code && env(rank, k1.env, k2->env);
    }

    bool stack(std::size_t rank, const List<CeshElem>& a, const DStack& b) {
        auto key_of = [&](const List<CeshElem>& x, const DStack& y) {
            return std::make_tuple(x.id(), y.elems.id(), y.bottom ? y.bottom->ptr.index : 0u,
                                   y.bottom ? y.bottom->node.str() + "#" + std::to_string(rank)
                                            : "#" + std::to_string(rank),
                                   y.bottom.has_value());
        };
        auto start = key_of(a, b);
        const List<CeshElem>* x = &a;
        List<DElem> elems = b.elems;
        std::optional<RemotePtr> bottom = b.bottom;
        for (;;) {
            if (memo_.sync_stacks.count(key_of(*x, DStack{elems, bottom}))) break;
            if (x->empty()) {
                if (!elems.empty() || bottom) return false;
                break;
            }
            if (!elems.empty()) {
                if (!elem(rank, x->front(), elems.front())) return false;
                x = &x->pop();
                elems = elems.pop();
                continue;
            }
            if (!bottom) return false;
            const auto* k1 = std::get_if<CeshCont>(&x->front());
            if (!k1) return false;
            auto node = net_.find(bottom->node);
            const DContCell* cell = node == net_.end() ? nullptr : node->second.cont_heap.deref(bottom->ptr);
            if (!cell || !(k1->code == cell->cont.code) || !env(rank, k1->env, cell->cont.env)) return false;
            x = &x->pop();
            elems = cell->stack.elems;
            bottom = cell->stack.bottom;
        }
        memo_.sync_stacks.insert(start);
        keep_alive(memo_, a);
        keep_alive(memo_, b.elems);
        return true;
    }

private:
    const Heap<CeshClosure>& heap_;
    const DNet& net_;
    RelationMemo& memo_;
};

std::string dcesh_rule_label(const SyncEvent<DMsg>& e) {
    std::string s(rule_name(e.rule));
    if (e.recv_rule) s += "/" + std::string(rule_name(*e.recv_rule));
    return s;
}

}  // namespace

Outcome<RefValue, std::monostate> eval_reference(const CoreTerm& t, std::uint64_t fuel, std::size_t max_depth) {
    Outcome<RefValue, std::monostate> out;
    Evaluator ev(fuel, max_depth);
    try {
        out.value = ev.run(t);
        out.verdict = out.value ? Verdict::Halted : Verdict::FuelExhausted;
    } catch (const EvalStuck& s) {
        out.verdict = Verdict::Stuck;
        out.reason = s.reason;
    }
    out.steps = ev.used();
    return out;
}

std::string show_value(const RefValue& v) {
    if (const auto* n = std::get_if<Nat>(&v)) return "nat " + std::to_string(*n);
    return "clos env=" + std::to_string(std::get<std::shared_ptr<const RefClosure>>(v)->env.size());
}

bool r_cfg(const CesConfig& ces, const CeshConfig& cesh, RelationMemo* memo) {
    RelationMemo local;
    CfgRelation rel(cesh.heap, memo ? *memo : local);
    return ces.pc == cesh.pc && rel.env(ces.env, cesh.env) && rel.stack(ces.stack, cesh.stack);
}

bool r_sync(const CeshConfig& cesh, const DNet& net, std::size_t rank, RelationMemo* memo) {
    const DThread* th = nullptr;
    for (const auto& [_, m] : net) {
        if (!m.thread) continue;
        if (th) return false;
        th = &*m.thread;
    }
    if (!th) return false;
    RelationMemo local;
    SyncRelation rel(cesh.heap, net, memo ? *memo : local);
    return cesh.pc == th->pc && rel.env(rank, cesh.env, th->env) && rel.stack(rank, cesh.stack, th->stack);
}

bool r_sync_value(const CeshValue& v, const Heap<CeshClosure>& heap, const DValue& dv, const DNet& net,
                  std::size_t rank) {
    RelationMemo memo;
    SyncRelation rel(heap, net, memo);
    return rel.value(rank, v, dv);
}

// ---------------------------------------------------------------------------
// Lockstep

std::string_view lockstep_verdict_name(LockstepVerdict v) {
    switch (v) {
        case LockstepVerdict::AllAgree: return "AllAgree";
        case LockstepVerdict::RelationBroken: return "RelationBroken";
        case LockstepVerdict::OutcomeMismatch: return "OutcomeMismatch";
    }
    return "?";
}

LockstepReport lockstep(const CoreTerm& t, const LockstepOptions& opts) { return lockstep(compile(t), opts); }

LockstepReport lockstep(const CodeTable& table, const LockstepOptions& opts) {
    LockstepReport rep;
    rep.value = "-";
    CesConfig ces = ces_initial(table);
    CeshConfig cesh = cesh_initial(table);
    DNet net = initial_network(table, opts.root, opts.nodes);
    DceshSemantics sem(table);
    RelationMemo memo;

    auto fail = [&](LockstepVerdict v, std::string relation, std::string detail) {
        rep.verdict = v;
        rep.relation = std::move(relation);
        rep.detail = std::move(detail);
        return rep;
    };
    auto check_relations = [&]() -> std::optional<std::string> {
        if (!r_cfg(ces, cesh, &memo)) return std::string("R_Cfg");
        if (!r_sync(cesh, net, opts.rank, &memo)) return std::string("R_Sync");
        return std::nullopt;
    };

    if (auto bad = check_relations()) return fail(LockstepVerdict::RelationBroken, *bad, "initial states unrelated");

    for (;;) {
        auto sc = enumerate_ces_successors(ces, table);
        auto sh = enumerate_cesh_successors(cesh, table);
        auto sn = enumerate_sync_steps(net, sem);

        ++rep.determinism_checks;
        if (sc.size() > 1) return fail(LockstepVerdict::RelationBroken, "determinism-ces", "several CES successors");
        if (sh.size() > 1) return fail(LockstepVerdict::RelationBroken, "determinism-cesh", "several CESH successors");
        if (sn.size() > 1) {
            return fail(LockstepVerdict::RelationBroken, "determinism-sync",
                        std::to_string(sn.size()) + " enabled sync steps");
        }

        ++rep.one_active_checks;
        if (count_active(net, sem) > 1) {
            return fail(LockstepVerdict::RelationBroken, "one-active", "more than one running thread");
        }

        for (const auto& [name, m] : net) {
            for (const auto& st : sem.active_steps(name, m)) {
                const auto* s = std::get_if<Send<DMsg>>(&st.tag);
                if (!s) continue;
                ++rep.point_to_point_checks;
                DNet after = net;
                after.insert_or_assign(name, st.next);
                auto rs = receivers(after, s->msg, sem);
                if (rs.size() != 1 || !(rs.front() == route(s->msg))) {
                    return fail(LockstepVerdict::RelationBroken, "point-to-point",
                                std::to_string(rs.size()) + " nodes can receive " + sem.summarize(s->msg));
                }
            }
        }

        bool c_moves = !sc.empty();
        bool h_moves = !sh.empty();
        bool n_moves = !sn.empty();
        if (!c_moves && !h_moves && !n_moves) {
            auto rc = step_ces(ces, table);
            auto rh = step_cesh(cesh, table);
            auto vn = sem.halted(net);
            const auto* hc = std::get_if<Halt<CesValue>>(&rc);
            const auto* hh = std::get_if<Halt<CeshValue>>(&rh);
            if (hc && hh && vn) {
                const Nat* n1 = std::get_if<Nat>(&hc->value);
                const Nat* n2 = std::get_if<Nat>(&hh->value);
                const Nat* n3 = std::get_if<Nat>(&*vn);
                if (n1 && n2 && n3) {
                    if (*n1 != *n2 || *n2 != *n3) {
                        return fail(LockstepVerdict::OutcomeMismatch, "result",
                                    "nat results differ: " + std::to_string(*n1) + ", " + std::to_string(*n2) + ", " +
                                        std::to_string(*n3));
                    }
                    rep.nat = *n1;
                    rep.value = "nat " + std::to_string(*n1);
                } else if (!n1 && !n2 && !n3) {
                    rep.value = "clos";
                } else {
                    return fail(LockstepVerdict::OutcomeMismatch, "result", "machines halt with different kinds");
                }
                rep.outcome = Verdict::Halted;
                return rep;
            }
            if (!hc && !hh && !vn) {
                rep.outcome = Verdict::Stuck;
                rep.detail = std::get<Stuck>(rc).reason;
                return rep;
            }
            return fail(LockstepVerdict::OutcomeMismatch, "halting",
                        std::string("halted: ces=") + (hc ? "yes" : "no") + " cesh=" + (hh ? "yes" : "no") +
                            " dcesh=" + (vn ? "yes" : "no"));
        }
        if (c_moves != h_moves || h_moves != n_moves) {
            return fail(LockstepVerdict::OutcomeMismatch, "progress",
                        std::string("can step: ces=") + (c_moves ? "yes" : "no") + " cesh=" + (h_moves ? "yes" : "no") +
                            " dcesh=" + (n_moves ? "yes" : "no"));
        }
        if (rep.steps == opts.fuel) {
            rep.outcome = Verdict::FuelExhausted;
            return rep;
        }

        auto old_heap = cesh.heap;
        DNet old_net = net;
        rep.ces_rules.push_back(sc.front().first);
        rep.cesh_rules.push_back(sh.front().first);
        rep.dcesh_rules.push_back(dcesh_rule_label(sn.front().event));
        if (sn.front().event.kind == SyncKind::Comm) ++rep.comm_steps;
        ces = std::move(sc.front().second);
        cesh = std::move(sh.front().second);
        net = std::move(sn.front().net);
        ++rep.steps;

        if (!is_prefix(old_heap, cesh.heap)) {
            return fail(LockstepVerdict::RelationBroken, "heap-monotonicity", "CESH heap shrank or changed");
        }
        for (const auto& [name, m] : old_net) {
            const DMachine& now = net.at(name);
            if (!is_prefix(m.clos_heap, now.clos_heap) || !is_prefix(m.cont_heap, now.cont_heap)) {
                return fail(LockstepVerdict::RelationBroken, "heap-monotonicity", "heap of " + name.str() + " changed");
            }
        }

        if (opts.mutate) {
            opts.mutate(rep.steps, cesh);
            memo.clear();
        }
        if (auto bad = check_relations()) {
            return fail(LockstepVerdict::RelationBroken, *bad,
                        "after step " + std::to_string(rep.steps) + " (" + std::string(rule_name(rep.cesh_rules.back())) +
                            ")");
        }
    }
}

bool corrupt_reachable_cell(CeshConfig& cfg) {
    std::optional<Ptr> target;
    auto scan = [&](const CeshEnv& env) {
        for (const auto& v : env) {
            if (const Ptr* p = std::get_if<Ptr>(&v); p && !target) target = *p;
        }
    };
    scan(cfg.env);
    for (const auto& e : cfg.stack) {
        if (target) break;
        if (const auto* v = std::get_if<CeshValue>(&e)) {
            if (const Ptr* p = std::get_if<Ptr>(v)) target = *p;
        } else {
            scan(std::get<CeshCont>(e).env);
        }
    }
    if (!target || !cfg.heap.deref(*target)) return false;
    CeshClosure cell = *cfg.heap.deref(*target);
    cell.code.offset += 1;
    cfg.heap = cfg.heap.with_cell_replaced(*target, cell);
    return true;
}

// ---------------------------------------------------------------------------
// Sync/async agreement

AsyncEquivReport check_async_equiv(const CodeTable& table, std::uint64_t fuel, const std::set<NodeName>& nodes,
                                   const NodeName& root, std::uint64_t random_seed) {
    AsyncEquivReport rep;
    DceshSemantics sem(table);
    auto bad = [&](std::string why) {
        rep.ok = false;
        rep.detail = std::move(why);
        return rep;
    };

    DSyncTrace strace;
    auto s = run_dcesh_sync(table, root, nodes, fuel, &strace);
    rep.verdict = s.verdict;
    rep.sync_steps = s.steps;
    rep.silent = s.stats.silent;
    rep.comm = s.stats.comm;

    // The async budget is exactly the length of the embedded sync run.
    std::uint64_t budget = s.stats.silent + 2 * s.stats.comm;
    DAsyncTrace atrace;
    auto a = run_dcesh_async(table, root, nodes, budget, Scheduler::fifo(), &atrace);
    rep.async_steps = a.steps;

    if (a.verdict != s.verdict) {
        return bad("verdicts differ: sync " + std::string(verdict_name(s.verdict)) + ", async " +
                   std::string(verdict_name(a.verdict)));
    }
    if (s.value.has_value() != a.value.has_value() || (s.value && !(*s.value == *a.value))) {
        return bad("values differ");
    }
    if (a.steps != budget) {
        return bad("async took " + std::to_string(a.steps) + " steps, expected " + std::to_string(budget));
    }
    if (a.stats.max_inflight > 1) return bad("more than one message in flight");
    if (!a.last.msgs.empty() || !(a.last.nodes == s.last)) return bad("final networks differ");

    auto embedded = sync_trace_to_async(strace);
    if (embedded.events.size() != budget) return bad("embedding has the wrong length");
    if (auto err = validate_async_trace(embedded, sem)) return bad("embedded trace: " + *err);
    if (!(embedded.states.back().nodes == s.last) || !embedded.states.back().msgs.empty()) {
        return bad("embedded trace ends elsewhere");
    }

    auto back = async_trace_to_sync(atrace, sem);
    if (auto* e = std::get_if<EmbeddingError>(&back)) return bad("compression failed: " + e->reason);
    const auto& compressed = std::get<DSyncTrace>(back);
    if (compressed.events.size() != strace.events.size()) return bad("compressed trace has the wrong length");
    if (!(compressed.states.front() == strace.states.front()) || !(compressed.states.back() == strace.states.back())) {
        return bad("compressed trace endpoints differ");
    }
    if (auto err = validate_sync_trace(compressed, sem)) return bad("compressed trace: " + *err);

    DAsyncTrace rtrace;
    auto r = run_dcesh_async(table, root, nodes, budget, Scheduler::random(random_seed), &rtrace);
    if (r.verdict != a.verdict || !(r.last == a.last) || rtrace.events.size() != atrace.events.size()) {
        return bad("random schedule diverges from FIFO");
    }
    for (std::size_t k = 0; k < rtrace.events.size(); ++k) {
        const auto& x = rtrace.events[k];
        const auto& y = atrace.events[k];
        if (x.kind != y.kind || !(x.node == y.node) || x.rule != y.rule || !(x.msg == y.msg)) {
            return bad("random schedule trace differs at step " + std::to_string(k + 1));
        }
    }
    return rep;
}

TermPtr replace_placements(const CoreTerm& t, std::uint64_t seed, const std::vector<NodeName>& nodes) {
    std::mt19937_64 rng(seed);
    std::function<TermPtr(const CoreTerm&)> go = [&](const CoreTerm& u) -> TermPtr {
        return std::visit(
            overloaded{
                [&](const CoreTerm::Lam& x) { return term::lam(go(*x.body)); },
                [&](const CoreTerm::App& x) {
                    auto f = go(*x.fn);
                    return term::app(f, go(*x.arg));
                },
                [&](const CoreTerm::Var& x) { return term::var(x.index); },
                [&](const CoreTerm::Lit& x) { return term::lit(x.value); },
                [&](const CoreTerm::Op& x) {
                    auto l = go(*x.lhs);
                    return term::op(x.op, l, go(*x.rhs));
                },
                [&](const CoreTerm::If0& x) {
                    auto c = go(*x.cond);
                    auto th = go(*x.then_branch);
                    return term::if0(c, th, go(*x.else_branch));
                },
                [&](const CoreTerm::At& x) {
                    const NodeName& n = nodes[rng() % nodes.size()];
                    return term::at(go(*x.body), n);
                },
            },
            u.node);
    };
    return go(t);
}

}  // namespace dam
