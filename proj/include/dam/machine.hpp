#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "dam/bytecode.hpp"
#include "dam/common.hpp"

namespace dam {

template <class Config>
struct Next {
    Config cfg;
    Rule rule;
};

template <class Value>
struct Halt {
    Value value;
};

struct Stuck {
    std::string reason;
};

template <class Config, class Value>
using StepResult = std::variant<Next<Config>, Halt<Value>, Stuck>;

// Fetches the instruction at `pc`, or nullptr at the terminator.
inline const Instr* fetch(const CodeTable& table, CodePos pc, const Terminator** term) {
    const Code& c = table.at(pc.code);
    if (pc.offset < c.body.size()) return &c.body[pc.offset];
    *term = &c.term;
    return nullptr;
}

inline CodePos advance(CodePos pc) { return CodePos{pc.code, pc.offset + 1}; }

// Drives a deterministic machine. `fuel` bounds the number of transitions;
// recognizing a halt state is free.
template <class Config, class Value, class StepFn>
Outcome<Value, Config> run_machine(Config cfg, std::uint64_t fuel, StepFn step,
                                   const std::function<void(std::uint64_t, Rule, const Config&)>& observe = {}) {
    Outcome<Value, Config> out;
    for (;;) {
        StepResult<Config, Value> r = step(cfg);
        if (auto* h = std::get_if<Halt<Value>>(&r)) {
            out.verdict = Verdict::Halted;
            out.value = std::move(h->value);
            break;
        }
        if (auto* s = std::get_if<Stuck>(&r)) {
            out.verdict = Verdict::Stuck;
            out.reason = std::move(s->reason);
            break;
        }
        if (out.steps == fuel) {
            out.verdict = Verdict::FuelExhausted;
            break;
        }
        auto& n = std::get<Next<Config>>(r);
        cfg = std::move(n.cfg);
        ++out.steps;
        if (observe) observe(out.steps, n.rule, cfg);
    }
    out.last = std::move(cfg);
    return out;
}

}  // namespace dam
