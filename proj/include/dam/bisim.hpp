#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "dam/ces.hpp"
#include "dam/cesh.hpp"
#include "dam/dcesh.hpp"
#include "dam/syntax.hpp"

namespace dam {

// ---------------------------------------------------------------------------
// Reference evaluator: environment-based big-step call-by-value.

struct RefClosure;
using RefValue = std::variant<Nat, std::shared_ptr<const RefClosure>>;
using RefEnv = List<RefValue>;

struct RefClosure {
    TermPtr body;
    RefEnv env;
};

// Fuel counts evaluation steps. More than `max_depth` pending evaluation
// contexts is also reported as FuelExhausted.
Outcome<RefValue, std::monostate> eval_reference(const CoreTerm& t, std::uint64_t fuel,
                                                 std::size_t max_depth = 1000000);

std::string show_value(const RefValue& v);

// ---------------------------------------------------------------------------
// Relations

// Memo tables for the relations. Entries stay valid while the heaps they
// were computed against only grow; clear them after any other change.
struct RelationMemo {
    std::set<std::pair<const CesClosure*, std::uint32_t>> cfg_clos;
    std::set<std::pair<const void*, const void*>> cfg_lists;
    std::map<std::tuple<std::size_t, std::uint32_t, std::uint32_t, std::string>, bool> sync_ptr;
    std::set<std::tuple<std::size_t, const void*, const void*>> sync_envs;
    std::set<std::tuple<const void*, const void*, std::uint32_t, std::string, bool>> sync_stacks;
    // Keeps memoized cells alive so their addresses are not reused.
    std::vector<std::shared_ptr<const void>> keep;

    void clear() { *this = RelationMemo{}; }
};

bool r_cfg(const CesConfig& ces, const CeshConfig& cesh, RelationMemo* memo = nullptr);

// R_Sync bounded at `rank`: the unique running node's thread is related to
// the CESH configuration.
bool r_sync(const CeshConfig& cesh, const DNet& net, std::size_t rank, RelationMemo* memo = nullptr);

// Closure-value relation at a given rank, exposed for the monotonicity test.
bool r_sync_value(const CeshValue& v, const Heap<CeshClosure>& heap, const DValue& dv, const DNet& net,
                  std::size_t rank);

// ---------------------------------------------------------------------------
// Lockstep

enum class LockstepVerdict { AllAgree, RelationBroken, OutcomeMismatch };

std::string_view lockstep_verdict_name(LockstepVerdict v);

struct LockstepOptions {
    std::uint64_t fuel = 10000;
    std::size_t rank = 3;
    std::set<NodeName> nodes;
    NodeName root;
    // Called after every CESH step; may corrupt the configuration.
    std::function<void(std::uint64_t step, CeshConfig&)> mutate;
};

struct LockstepReport {
    LockstepVerdict verdict = LockstepVerdict::AllAgree;
    Verdict outcome = Verdict::Stuck;  // common outcome when AllAgree
    std::uint64_t steps = 0;
    std::string relation;  // which check failed
    std::string detail;
    std::string value;     // "nat n", "clos", or "-"
    std::optional<Nat> nat;
    std::uint64_t comm_steps = 0;
    std::uint64_t determinism_checks = 0;
    std::uint64_t one_active_checks = 0;
    std::uint64_t point_to_point_checks = 0;
    std::vector<Rule> ces_rules;
    std::vector<Rule> cesh_rules;
    std::vector<std::string> dcesh_rules;
};

LockstepReport lockstep(const CoreTerm& t, const LockstepOptions& opts);
LockstepReport lockstep(const CodeTable& table, const LockstepOptions& opts);

struct AsyncEquivReport {
    bool ok = true;
    std::string detail;
    Verdict verdict = Verdict::Stuck;
    std::uint64_t sync_steps = 0;
    std::uint64_t silent = 0;
    std::uint64_t comm = 0;
    std::uint64_t async_steps = 0;
};

// Runs DCESH under both network semantics and checks that they agree and
// that the trace embeddings in both directions hold.
AsyncEquivReport check_async_equiv(const CodeTable& table, std::uint64_t fuel, const std::set<NodeName>& nodes,
                                   const NodeName& root, std::uint64_t random_seed = 1);

// Changes the code pointer of the first heap cell reachable from the
// environment or stack. Returns false if no cell is reachable.
bool corrupt_reachable_cell(CeshConfig& cfg);

// Replaces each '@' annotation with a node drawn from `nodes`.
TermPtr replace_placements(const CoreTerm& t, std::uint64_t seed, const std::vector<NodeName>& nodes);

}  // namespace dam
