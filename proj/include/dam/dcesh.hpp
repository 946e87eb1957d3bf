#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dam/bytecode.hpp"
#include "dam/heap.hpp"
#include "dam/list.hpp"
#include "dam/network.hpp"

namespace dam {

struct RemotePtr {
    Ptr ptr;
    NodeName node;

    friend auto operator<=>(const RemotePtr&, const RemotePtr&) = default;
    friend bool operator==(const RemotePtr&, const RemotePtr&) = default;
};

using DValue = std::variant<Nat, RemotePtr>;
using DEnv = List<DValue>;

struct DClosure {
    CodePos code;
    DEnv env;

    friend bool operator==(const DClosure&, const DClosure&) = default;
};

struct DCont {
    CodePos code;
    DEnv env;

    friend bool operator==(const DCont&, const DCont&) = default;
};

using DElem = std::variant<DValue, DCont>;

struct DStack {
    List<DElem> elems;
    std::optional<RemotePtr> bottom;

    friend bool operator==(const DStack&, const DStack&) = default;
};

struct DThread {
    CodePos pc;
    DEnv env;
    DStack stack;

    friend bool operator==(const DThread&, const DThread&) = default;
};

struct DContCell {
    DCont cont;
    DStack stack;

    friend bool operator==(const DContCell&, const DContCell&) = default;
};

struct DMachine {
    std::optional<DThread> thread;
    Heap<DClosure> clos_heap;
    Heap<DContCell> cont_heap;

    friend bool operator==(const DMachine&, const DMachine&) = default;
};

namespace dmsg {
struct Remote {
    CodeRef code;
    NodeName target;
    RemotePtr cont;
    friend bool operator==(const Remote&, const Remote&) = default;
};
struct Appl {
    RemotePtr clos;
    DValue arg;
    RemotePtr cont;
    friend bool operator==(const Appl&, const Appl&) = default;
};
struct Ret {
    RemotePtr cont;
    DValue value;
    friend bool operator==(const Ret&, const Ret&) = default;
};
}  // namespace dmsg

using DMsg = std::variant<dmsg::Remote, dmsg::Appl, dmsg::Ret>;

NodeName route(const DMsg& msg);

class DceshSemantics {
public:
    using Machine = DMachine;
    using Msg = DMsg;
    using Value = DValue;
    using Step = LocalStep<Machine, Msg>;

    explicit DceshSemantics(const CodeTable& table) : table_(&table) {}

    std::vector<Step> active_steps(const NodeName& i, const Machine& m) const;
    std::variant<Step, Refusal> receive(const NodeName& i, const Machine& m, const Msg& msg) const;
    NodeName route(const Msg& msg) const { return dam::route(msg); }
    bool is_active(const Machine& m) const { return m.thread.has_value(); }
    std::string diagnose(const NodeName& i, const Machine& m) const;
    std::string summarize(const Msg& msg) const;

    // The final value if exactly one node is active and its thread has the
    // halting shape.
    std::optional<Value> halted(const SyncNet<Machine>& nodes) const;

    const CodeTable& table() const { return *table_; }

private:
    const CodeTable* table_;
};

using DNet = SyncNet<DMachine>;
using DAsyncNet = AsyncNet<DMachine, DMsg>;
using DSyncTrace = SyncTrace<DMachine, DMsg>;
using DAsyncTrace = AsyncTrace<DMachine, DMsg>;

// Throws InputError if root is not a member of nodes, or if a REMOTE names
// an undeclared node.
DNet initial_network(const CodeTable& table, const NodeName& root, const std::set<NodeName>& nodes);

void check_placement(const CodeTable& table, const NodeName& root, const std::set<NodeName>& nodes);

NetOutcome<DValue, DNet> run_dcesh_sync(const CodeTable& table, const NodeName& root, const std::set<NodeName>& nodes,
                                        std::uint64_t fuel, DSyncTrace* trace = nullptr,
                                        const std::function<void(std::uint64_t, const SyncEvent<DMsg>&)>& observe = {});

NetOutcome<DValue, DAsyncNet> run_dcesh_async(
    const CodeTable& table, const NodeName& root, const std::set<NodeName>& nodes, std::uint64_t fuel,
    Scheduler sched = Scheduler::fifo(), DAsyncTrace* trace = nullptr,
    const std::function<void(std::uint64_t, const AsyncEvent<DMsg>&)>& observe = {});

std::string show_value(const DValue& v, const DNet& nodes);

std::string show_heap_sizes(const DNet& nodes);

std::set<NodeName> parse_node_list(const std::string& list);

}  // namespace dam
