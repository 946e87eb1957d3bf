#pragma once

// Two-level network semantics over an arbitrary node-local labelled
// transition system. A semantics object S supplies
//
//   using Machine, Msg;
//   std::vector<LocalStep<Machine, Msg>> active_steps(const NodeName&, const Machine&) const;
//       silent and send transitions of one node
//   std::variant<LocalStep<Machine, Msg>, Refusal> receive(const NodeName&, const Machine&, const Msg&) const;
//   NodeName route(const Msg&) const;
//   bool is_active(const Machine&) const;
//   std::string diagnose(const NodeName&, const Machine&) const;   why an active node cannot step
//   std::string summarize(const Msg&) const;

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dam/common.hpp"

namespace dam {

template <class M>
struct Silent {
    friend bool operator==(const Silent&, const Silent&) = default;
};
template <class M>
struct Send {
    M msg;
    friend bool operator==(const Send&, const Send&) = default;
};
template <class M>
struct Receive {
    M msg;
    friend bool operator==(const Receive&, const Receive&) = default;
};

template <class M>
using Tagged = std::variant<Silent<M>, Send<M>, Receive<M>>;

// (inbox, outbox)
template <class M>
std::pair<std::vector<M>, std::vector<M>> detag(const Tagged<M>& t) {
    if (const auto* s = std::get_if<Send<M>>(&t)) return {{}, {s->msg}};
    if (const auto* r = std::get_if<Receive<M>>(&t)) return {{r->msg}, {}};
    return {{}, {}};
}

template <class Machine, class Msg>
struct LocalStep {
    Tagged<Msg> tag;
    Machine next;
    Rule rule;
};

struct Refusal {
    std::string reason;
};

template <class Machine>
using SyncNet = std::map<NodeName, Machine>;

template <class Machine, class Msg>
struct AsyncNet {
    SyncNet<Machine> nodes;
    std::vector<Msg> msgs;

    friend bool operator==(const AsyncNet&, const AsyncNet&) = default;
};

template <class Machine>
std::size_t count_active(const SyncNet<Machine>& nodes, const auto& sem) {
    std::size_t n = 0;
    for (const auto& [_, m] : nodes) n += sem.is_active(m) ? 1 : 0;
    return n;
}

// ---------------------------------------------------------------------------
// Synchronous network

enum class SyncKind { Silent, Comm };

template <class Msg>
struct SyncEvent {
    SyncKind kind;
    NodeName node;  // the stepping node, or the sender
    Rule rule;
    std::optional<NodeName> receiver;
    std::optional<Rule> recv_rule;
    std::optional<Msg> msg;
};

template <class Machine, class Msg>
struct SyncStepped {
    SyncNet<Machine> net;
    SyncEvent<Msg> event;
    std::optional<Machine> sender_after;  // comm only: the sender after its send half
};

struct Quiescent {};

struct EngineError {
    enum class Kind { Ambiguous, Undeliverable };
    Kind kind;
    std::string detail;
};

template <class Machine, class Msg>
using SyncResult = std::variant<Quiescent, SyncStepped<Machine, Msg>, EngineError>;

template <class S>
SyncResult<typename S::Machine, typename S::Msg> sync_step(const SyncNet<typename S::Machine>& nodes, const S& sem) {
    using Machine = typename S::Machine;
    using Msg = typename S::Msg;
    std::optional<std::pair<NodeName, LocalStep<Machine, Msg>>> chosen;
    for (const auto& [name, m] : nodes) {
        auto steps = sem.active_steps(name, m);
        if (steps.empty()) continue;
        if (chosen || steps.size() > 1) {
            return EngineError{EngineError::Kind::Ambiguous,
                               "more than one enabled step (at " + (chosen ? chosen->first.str() : name.str()) +
                                   " and " + name.str() + ")"};
        }
        chosen.emplace(name, std::move(steps.front()));
    }
    if (!chosen) return Quiescent{};
    auto& [node, step] = *chosen;
    SyncNet<Machine> next = nodes;
    next.insert_or_assign(node, step.next);
    if (std::holds_alternative<Silent<Msg>>(step.tag)) {
        return SyncStepped<Machine, Msg>{std::move(next), SyncEvent<Msg>{SyncKind::Silent, node, step.rule, {}, {}, {}},
                                         std::nullopt};
    }
    const Msg& msg = std::get<Send<Msg>>(step.tag).msg;
    NodeName target = sem.route(msg);
    auto it = next.find(target);
    if (it == next.end()) {
        return EngineError{EngineError::Kind::Undeliverable, "message routed to unknown node " + target.str()};
    }
    auto r = sem.receive(target, it->second, msg);
    if (auto* refusal = std::get_if<Refusal>(&r)) {
        return EngineError{EngineError::Kind::Undeliverable, target.str() + " cannot receive " + sem.summarize(msg) +
                                                                 ": " + refusal->reason};
    }
    auto& recv = std::get<LocalStep<Machine, Msg>>(r);
    it->second = recv.next;
    return SyncStepped<Machine, Msg>{
        std::move(next), SyncEvent<Msg>{SyncKind::Comm, node, step.rule, target, recv.rule, msg}, step.next};
}

// Every sync transition the network admits, trying every possible receiver
// for each send. Used by the determinism and point-to-point checks.
template <class S>
std::vector<SyncStepped<typename S::Machine, typename S::Msg>> enumerate_sync_steps(
    const SyncNet<typename S::Machine>& nodes, const S& sem) {
    using Machine = typename S::Machine;
    using Msg = typename S::Msg;
    std::vector<SyncStepped<Machine, Msg>> out;
    for (const auto& [name, m] : nodes) {
        for (auto& step : sem.active_steps(name, m)) {
            SyncNet<Machine> next = nodes;
            next.insert_or_assign(name, step.next);
            if (std::holds_alternative<Silent<Msg>>(step.tag)) {
                out.push_back({next, SyncEvent<Msg>{SyncKind::Silent, name, step.rule, {}, {}, {}}, std::nullopt});
                continue;
            }
            const Msg& msg = std::get<Send<Msg>>(step.tag).msg;
            for (const auto& [rname, rm] : next) {
                auto r = sem.receive(rname, rm, msg);
                if (auto* recv = std::get_if<LocalStep<Machine, Msg>>(&r)) {
                    SyncNet<Machine> after = next;
                    after.insert_or_assign(rname, recv->next);
                    out.push_back({std::move(after),
                                   SyncEvent<Msg>{SyncKind::Comm, name, step.rule, rname, recv->rule, msg}, step.next});
                }
            }
        }
    }
    return out;
}

// Nodes able to receive `msg` in the given family.
template <class S>
std::vector<NodeName> receivers(const SyncNet<typename S::Machine>& nodes, const typename S::Msg& msg, const S& sem) {
    std::vector<NodeName> out;
    for (const auto& [name, m] : nodes) {
        if (std::holds_alternative<LocalStep<typename S::Machine, typename S::Msg>>(sem.receive(name, m, msg))) {
            out.push_back(name);
        }
    }
    return out;
}

template <class Machine, class Msg>
struct SyncTrace {
    std::vector<SyncNet<Machine>> states;  // states.size() == events.size() + 1
    std::vector<SyncEvent<Msg>> events;
    std::vector<std::optional<Machine>> sender_after;
};

// ---------------------------------------------------------------------------
// Asynchronous network

enum class AsyncKind { Silent, Send, Receive };

template <class Msg>
struct AsyncEvent {
    AsyncKind kind;
    NodeName node;
    Rule rule;
    std::optional<Msg> msg;
    std::size_t inflight = 0;  // after the step
};

template <class Machine, class Msg>
struct AsyncStepped {
    AsyncNet<Machine, Msg> net;
    AsyncEvent<Msg> event;
};

class Scheduler {
public:
    enum class Policy { Fifo, Random };

    Scheduler() = default;
    static Scheduler fifo() { return Scheduler(); }
    static Scheduler random(std::uint64_t seed) {
        Scheduler s;
        s.policy_ = Policy::Random;
        s.rng_.seed(seed);
        return s;
    }

    Policy policy() const { return policy_; }

    std::size_t pick(std::size_t n) {
        if (policy_ == Policy::Fifo || n <= 1) return 0;
        return static_cast<std::size_t>(rng_() % n);
    }

private:
    Policy policy_ = Policy::Fifo;
    std::mt19937_64 rng_;
};

// All async transitions, receives first (by message position, then node),
// then silent/send steps by node.
template <class S>
std::vector<AsyncStepped<typename S::Machine, typename S::Msg>> enumerate_async_steps(
    const AsyncNet<typename S::Machine, typename S::Msg>& net, const S& sem) {
    using Machine = typename S::Machine;
    using Msg = typename S::Msg;
    std::vector<AsyncStepped<Machine, Msg>> out;
    for (std::size_t j = 0; j < net.msgs.size(); ++j) {
        for (const auto& [name, m] : net.nodes) {
            auto r = sem.receive(name, m, net.msgs[j]);
            if (auto* recv = std::get_if<LocalStep<Machine, Msg>>(&r)) {
                AsyncNet<Machine, Msg> next = net;
                next.nodes.insert_or_assign(name, recv->next);
                next.msgs.erase(next.msgs.begin() + static_cast<std::ptrdiff_t>(j));
                std::size_t k = next.msgs.size();
                out.push_back({std::move(next), AsyncEvent<Msg>{AsyncKind::Receive, name, recv->rule, net.msgs[j], k}});
            }
        }
    }
    for (const auto& [name, m] : net.nodes) {
        for (auto& step : sem.active_steps(name, m)) {
            AsyncNet<Machine, Msg> next = net;
            next.nodes.insert_or_assign(name, step.next);
            auto [in, outbox] = detag(step.tag);
            next.msgs.insert(next.msgs.end(), outbox.begin(), outbox.end());
            std::size_t k = next.msgs.size();
            if (outbox.empty()) {
                out.push_back({std::move(next), AsyncEvent<Msg>{AsyncKind::Silent, name, step.rule, std::nullopt, k}});
            } else {
                out.push_back({std::move(next), AsyncEvent<Msg>{AsyncKind::Send, name, step.rule, outbox.front(), k}});
            }
        }
    }
    return out;
}

template <class S>
std::optional<AsyncStepped<typename S::Machine, typename S::Msg>> async_step(
    const AsyncNet<typename S::Machine, typename S::Msg>& net, const S& sem, Scheduler& sched) {
    auto all = enumerate_async_steps(net, sem);
    if (all.empty()) return std::nullopt;
    return std::move(all[sched.pick(all.size())]);
}

template <class Machine, class Msg>
struct AsyncTrace {
    std::vector<AsyncNet<Machine, Msg>> states;
    std::vector<AsyncEvent<Msg>> events;
};

// ---------------------------------------------------------------------------
// Trace embeddings

template <class Machine, class Msg>
AsyncTrace<Machine, Msg> sync_trace_to_async(const SyncTrace<Machine, Msg>& t) {
    AsyncTrace<Machine, Msg> out;
    if (t.states.empty()) return out;
    out.states.push_back({t.states.front(), {}});
    for (std::size_t k = 0; k < t.events.size(); ++k) {
        const auto& e = t.events[k];
        if (e.kind == SyncKind::Silent) {
            out.events.push_back({AsyncKind::Silent, e.node, e.rule, std::nullopt, 0});
            out.states.push_back({t.states[k + 1], {}});
            continue;
        }
        SyncNet<Machine> mid = t.states[k];
        mid.insert_or_assign(e.node, *t.sender_after[k]);
        out.events.push_back({AsyncKind::Send, e.node, e.rule, e.msg, 1});
        out.states.push_back({std::move(mid), {*e.msg}});
        out.events.push_back({AsyncKind::Receive, *e.receiver, *e.recv_rule, e.msg, 0});
        out.states.push_back({t.states[k + 1], {}});
    }
    return out;
}

struct EmbeddingError {
    std::string reason;
};

template <class Machine, class Msg, class S>
std::variant<SyncTrace<Machine, Msg>, EmbeddingError> async_trace_to_sync(const AsyncTrace<Machine, Msg>& t,
                                                                           const S& sem) {
    if (t.states.empty()) return EmbeddingError{"empty trace"};
    if (!t.states.front().msgs.empty()) return EmbeddingError{"trace does not start with an empty message list"};
    if (!t.states.back().msgs.empty()) return EmbeddingError{"trace does not end with an empty message list"};
    if (count_active(t.states.front().nodes, sem) > 1) {
        return EmbeddingError{"more than one node is active in the initial state"};
    }
    SyncTrace<Machine, Msg> out;
    out.states.push_back(t.states.front().nodes);
    for (std::size_t k = 0; k < t.events.size(); ++k) {
        const auto& e = t.events[k];
        switch (e.kind) {
            case AsyncKind::Silent:
                out.events.push_back({SyncKind::Silent, e.node, e.rule, {}, {}, {}});
                out.sender_after.push_back(std::nullopt);
                out.states.push_back(t.states[k + 1].nodes);
                break;
            case AsyncKind::Send: {
                if (k + 1 >= t.events.size() || t.events[k + 1].kind != AsyncKind::Receive ||
                    !(t.events[k + 1].msg == e.msg)) {
                    return EmbeddingError{"send at step " + std::to_string(k + 1) +
                                          " is not immediately followed by its receive"};
                }
                const auto& r = t.events[k + 1];
                out.events.push_back({SyncKind::Comm, e.node, e.rule, r.node, r.rule, e.msg});
                out.sender_after.push_back(t.states[k + 1].nodes.at(e.node));
                out.states.push_back(t.states[k + 2].nodes);
                ++k;
                break;
            }
            case AsyncKind::Receive:
                return EmbeddingError{"receive at step " + std::to_string(k + 1) + " without a preceding send"};
        }
    }
    return out;
}

// Replays every event of a sync trace and checks each recorded state is
// the one the semantics produces.
template <class S>
std::optional<std::string> validate_sync_trace(const SyncTrace<typename S::Machine, typename S::Msg>& t,
                                               const S& sem) {
    using Machine = typename S::Machine;
    using Msg = typename S::Msg;
    if (t.states.size() != t.events.size() + 1) return "state/event count mismatch";
    for (std::size_t k = 0; k < t.events.size(); ++k) {
        const auto& e = t.events[k];
        const auto& before = t.states[k];
        bool ok = false;
        for (auto& step : sem.active_steps(e.node, before.at(e.node))) {
            if (step.rule != e.rule) continue;
            SyncNet<Machine> next = before;
            next.insert_or_assign(e.node, step.next);
            if (e.kind == SyncKind::Silent) {
                ok = std::holds_alternative<Silent<Msg>>(step.tag) && next == t.states[k + 1];
            } else if (const auto* s = std::get_if<Send<Msg>>(&step.tag); s && e.msg && s->msg == *e.msg) {
                auto r = sem.receive(*e.receiver, next.at(*e.receiver), s->msg);
                if (auto* recv = std::get_if<LocalStep<Machine, Msg>>(&r); recv && recv->rule == *e.recv_rule) {
                    next.insert_or_assign(*e.receiver, recv->next);
                    ok = next == t.states[k + 1];
                }
            }
            if (ok) break;
        }
        if (!ok) return "sync step " + std::to_string(k + 1) + " does not replay";
    }
    return std::nullopt;
}

template <class S>
std::optional<std::string> validate_async_trace(const AsyncTrace<typename S::Machine, typename S::Msg>& t,
                                                const S& sem) {
    if (t.states.size() != t.events.size() + 1) return "state/event count mismatch";
    for (std::size_t k = 0; k < t.events.size(); ++k) {
        bool ok = false;
        for (auto& cand : enumerate_async_steps(t.states[k], sem)) {
            const auto& e = t.events[k];
            if (cand.event.kind == e.kind && cand.event.node == e.node && cand.event.rule == e.rule &&
                cand.event.msg == e.msg && cand.net == t.states[k + 1]) {
                ok = true;
                break;
            }
        }
        if (!ok) return "async step " + std::to_string(k + 1) + " does not replay";
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Trace lines

template <class Msg, class S>
std::string format_event(std::uint64_t t, const SyncEvent<Msg>& e, const S& sem) {
    std::string out = "t=" + std::to_string(t) + " kind=" + (e.kind == SyncKind::Silent ? "silent" : "comm") +
                      " node=" + e.node.str();
    if (e.receiver) out += "->recv=" + e.receiver->str();
    out += " rule=" + std::string(rule_name(e.rule));
    if (e.recv_rule) out += "/" + std::string(rule_name(*e.recv_rule));
    out += " msg=" + (e.msg ? sem.summarize(*e.msg) : std::string("-"));
    out += " inflight=0";
    return out;
}

template <class Msg, class S>
std::string format_event(std::uint64_t t, const AsyncEvent<Msg>& e, const S& sem) {
    const char* kind = e.kind == AsyncKind::Silent ? "silent" : e.kind == AsyncKind::Send ? "async-send" : "async-recv";
    return "t=" + std::to_string(t) + " kind=" + kind + " node=" + e.node.str() +
           " rule=" + std::string(rule_name(e.rule)) + " msg=" + (e.msg ? sem.summarize(*e.msg) : std::string("-")) +
           " inflight=" + std::to_string(e.inflight);
}

// ---------------------------------------------------------------------------
// Drivers

struct NetStats {
    std::uint64_t silent = 0;
    std::uint64_t comm = 0;     // sync comm-steps
    std::uint64_t sends = 0;    // async
    std::uint64_t receives = 0; // async
    std::size_t max_inflight = 0;
};

template <class Value, class Net>
struct NetOutcome : Outcome<Value, Net> {
    NetStats stats;
};

// `halted(net)` recognizes final states; `trace`, when given, records every
// step.
template <class S, class HaltFn>
NetOutcome<typename S::Value, SyncNet<typename S::Machine>> run_sync(
    SyncNet<typename S::Machine> net, const S& sem, std::uint64_t fuel, HaltFn halted,
    SyncTrace<typename S::Machine, typename S::Msg>* trace = nullptr,
    const std::function<void(std::uint64_t, const SyncEvent<typename S::Msg>&)>& observe = {}) {
    NetOutcome<typename S::Value, SyncNet<typename S::Machine>> out;
    if (trace) trace->states.push_back(net);
    for (;;) {
        if (auto v = halted(net)) {
            out.verdict = Verdict::Halted;
            out.value = std::move(*v);
            break;
        }
        auto r = sync_step(net, sem);
        if (auto* err = std::get_if<EngineError>(&r)) {
            out.verdict = Verdict::Stuck;
            out.reason = (err->kind == EngineError::Kind::Ambiguous ? "ambiguous schedule: " : "undeliverable: ") +
                         err->detail;
            break;
        }
        if (std::holds_alternative<Quiescent>(r)) {
            out.verdict = Verdict::Stuck;
            out.reason = "no enabled step";
            for (const auto& [name, m] : net) {
                if (sem.is_active(m)) out.reason = name.str() + ": " + sem.diagnose(name, m);
            }
            break;
        }
        if (out.steps == fuel) {
            out.verdict = Verdict::FuelExhausted;
            break;
        }
        auto& st = std::get<SyncStepped<typename S::Machine, typename S::Msg>>(r);
        ++out.steps;
        (st.event.kind == SyncKind::Silent ? out.stats.silent : out.stats.comm) += 1;
        if (observe) observe(out.steps, st.event);
        net = std::move(st.net);
        if (trace) {
            trace->events.push_back(st.event);
            trace->sender_after.push_back(std::move(st.sender_after));
            trace->states.push_back(net);
        }
    }
    out.last = std::move(net);
    return out;
}

template <class S, class HaltFn>
NetOutcome<typename S::Value, AsyncNet<typename S::Machine, typename S::Msg>> run_async(
    AsyncNet<typename S::Machine, typename S::Msg> net, const S& sem, std::uint64_t fuel, Scheduler sched,
    HaltFn halted, AsyncTrace<typename S::Machine, typename S::Msg>* trace = nullptr,
    const std::function<void(std::uint64_t, const AsyncEvent<typename S::Msg>&)>& observe = {}) {
    NetOutcome<typename S::Value, AsyncNet<typename S::Machine, typename S::Msg>> out;
    if (trace) trace->states.push_back(net);
    for (;;) {
        if (net.msgs.empty()) {
            if (auto v = halted(net.nodes)) {
                out.verdict = Verdict::Halted;
                out.value = std::move(*v);
                break;
            }
        }
        auto all = enumerate_async_steps(net, sem);
        if (all.empty()) {
            out.verdict = Verdict::Stuck;
            out.reason = net.msgs.empty() ? "no enabled step" : "undeliverable message " + sem.summarize(net.msgs.front());
            for (const auto& [name, m] : net.nodes) {
                if (sem.is_active(m)) out.reason = name.str() + ": " + sem.diagnose(name, m);
            }
            break;
        }
        if (out.steps == fuel) {
            out.verdict = Verdict::FuelExhausted;
            break;
        }
        auto st = std::move(all[sched.pick(all.size())]);
        ++out.steps;
        switch (st.event.kind) {
            case AsyncKind::Silent: ++out.stats.silent; break;
            case AsyncKind::Send: ++out.stats.sends; break;
            case AsyncKind::Receive: ++out.stats.receives; break;
        }
        net = std::move(st.net);
        out.stats.max_inflight = std::max(out.stats.max_inflight, net.msgs.size());
        if (observe) observe(out.steps, st.event);
        if (trace) {
            trace->events.push_back(st.event);
            trace->states.push_back(net);
        }
    }
    out.last = std::move(net);
    return out;
}

}  // namespace dam
