#pragma once

// Single-node machine in which every application and return goes through
// the network as a message the node sends to itself.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dam/bytecode.hpp"
#include "dam/cesh.hpp"
#include "dam/heap.hpp"
#include "dam/list.hpp"
#include "dam/network.hpp"

namespace dam {

using D1Value = std::variant<Nat, Ptr>;
using D1Env = List<D1Value>;
using D1Closure = CeshClosure;

struct D1Stack {
    List<D1Value> elems;
    std::optional<Ptr> bottom;

    friend bool operator==(const D1Stack&, const D1Stack&) = default;
};

struct D1Thread {
    CodePos pc;
    D1Env env;
    D1Stack stack;

    friend bool operator==(const D1Thread&, const D1Thread&) = default;
};

struct D1ContCell {
    CodePos code;
    D1Env env;
    D1Stack stack;

    friend bool operator==(const D1ContCell&, const D1ContCell&) = default;
};

struct D1Machine {
    std::optional<D1Thread> thread;
    Heap<D1Closure> clos_heap;
    Heap<D1ContCell> cont_heap;

    friend bool operator==(const D1Machine&, const D1Machine&) = default;
};

namespace d1msg {
struct Appl {
    Ptr clos;
    D1Value arg;
    Ptr cont;
    friend bool operator==(const Appl&, const Appl&) = default;
};
struct Ret {
    Ptr cont;
    D1Value value;
    friend bool operator==(const Ret&, const Ret&) = default;
};
}  // namespace d1msg

using D1Msg = std::variant<d1msg::Appl, d1msg::Ret>;

class Dcesh1Semantics {
public:
    using Machine = D1Machine;
    using Msg = D1Msg;
    using Value = D1Value;
    using Step = LocalStep<Machine, Msg>;

    Dcesh1Semantics(const CodeTable& table, NodeName self) : table_(&table), self_(std::move(self)) {}

    std::vector<Step> active_steps(const NodeName& i, const Machine& m) const;
    std::variant<Step, Refusal> receive(const NodeName& i, const Machine& m, const Msg& msg) const;
    NodeName route(const Msg&) const { return self_; }
    bool is_active(const Machine& m) const { return m.thread.has_value(); }
    std::string diagnose(const NodeName& i, const Machine& m) const;
    std::string summarize(const Msg& msg) const;

    std::optional<Value> halted(const Machine& m) const;

    const NodeName& self() const { return self_; }

private:
    const CodeTable* table_;
    NodeName self_;
};

using D1Net = AsyncNet<D1Machine, D1Msg>;
using D1Outcome = NetOutcome<D1Value, D1Net>;
using D1AsyncTrace = AsyncTrace<D1Machine, D1Msg>;

D1Machine dcesh1_initial(const CodeTable& table);

// Name of the single node.
const NodeName& dcesh1_node();

// Throws InputError if the table contains REMOTE.
D1Outcome run_dcesh1(const CodeTable& table, std::uint64_t fuel, Scheduler sched = Scheduler::fifo(),
                     D1AsyncTrace* trace = nullptr,
                     const std::function<void(std::uint64_t, const AsyncEvent<D1Msg>&)>& observe = {});

std::string show_value(const D1Value& v, const D1Machine& m);

}  // namespace dam
