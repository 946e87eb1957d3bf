#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dam/bytecode.hpp"
#include "dam/heap.hpp"
#include "dam/list.hpp"
#include "dam/machine.hpp"

namespace dam {

using CeshValue = std::variant<Nat, Ptr>;
using CeshEnv = List<CeshValue>;

struct CeshClosure {
    CodePos code;
    CeshEnv env;

    friend bool operator==(const CeshClosure&, const CeshClosure&) = default;
};

struct CeshCont {
    CodePos code;
    CeshEnv env;

    friend bool operator==(const CeshCont&, const CeshCont&) = default;
};

using CeshElem = std::variant<CeshValue, CeshCont>;

struct CeshConfig {
    CodePos pc;
    CeshEnv env;
    List<CeshElem> stack;
    Heap<CeshClosure> heap;
};

using CeshStep = StepResult<CeshConfig, CeshValue>;
using CeshOutcome = Outcome<CeshValue, CeshConfig>;

CeshConfig cesh_initial(const CodeTable& table);

CeshStep step_cesh(CeshConfig cfg, const CodeTable& table);

std::vector<std::pair<Rule, CeshConfig>> enumerate_cesh_successors(const CeshConfig& cfg, const CodeTable& table);

CeshOutcome run_cesh(const CodeTable& table, std::uint64_t fuel,
                     const std::function<void(std::uint64_t, Rule, const CeshConfig&)>& observe = {});

std::string show_value(const CeshValue& v, const Heap<CeshClosure>& heap);

// Heap cells as s-expressions, one per line.
std::string dump_heap(const Heap<CeshClosure>& heap);

}  // namespace dam
