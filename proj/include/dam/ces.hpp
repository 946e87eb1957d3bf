#pragma once

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dam/bytecode.hpp"
#include "dam/list.hpp"
#include "dam/machine.hpp"

namespace dam {

struct CesClosure;
using CesValue = std::variant<Nat, std::shared_ptr<const CesClosure>>;
using CesEnv = List<CesValue>;  // front = index 0

struct CesClosure {
    CodePos code;
    CesEnv env;
};

struct CesCont {
    CodePos code;
    CesEnv env;
};

using CesElem = std::variant<CesValue, CesCont>;

struct CesConfig {
    CodePos pc;
    CesEnv env;
    List<CesElem> stack;  // front = top
};

using CesStep = StepResult<CesConfig, CesValue>;
using CesOutcome = Outcome<CesValue, CesConfig>;

CesConfig ces_initial(const CodeTable& table);

CesStep step_ces(CesConfig cfg, const CodeTable& table);

std::vector<std::pair<Rule, CesConfig>> enumerate_ces_successors(const CesConfig& cfg, const CodeTable& table);

CesOutcome run_ces(const CodeTable& table, std::uint64_t fuel,
                   const std::function<void(std::uint64_t, Rule, const CesConfig&)>& observe = {});

std::string show_value(const CesValue& v);

}  // namespace dam
