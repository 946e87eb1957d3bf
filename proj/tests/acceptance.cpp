// Acceptance gate: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "dam/bisim.hpp"
#include "dam/dcesh1.hpp"
#include "support.hpp"

using namespace dam;

namespace {

const NodeName A("A");
const NodeName B("B");
const std::set<NodeName> AB{A, B};
const std::vector<NodeName> ab{A, B};

struct Verdict_ {
    bool ok = true;
    std::string note;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int n, const char* what, double limit_s, const std::function<Verdict_()>& body) {
    auto start = Clock::now();
    Verdict_ v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    bool in_time = limit_s <= 0 || secs < limit_s;
    bool pass = v.ok && in_time;
    if (!pass) ++failures;
    std::ostringstream line;
    line << "criterion " << n << ": " << (pass ? "PASS" : "FAIL") << "  " << what << "  (" << std::fixed
         << std::setprecision(3) << secs << " s";
    if (limit_s > 0) line << ", limit " << limit_s << " s";
    line << ")";
    if (!in_time) line << "  too slow";
    if (!v.note.empty()) line << "  " << v.note;
    std::cout << line.str() << std::endl;
}

LockstepOptions corpus_options() {
    LockstepOptions o;
    o.fuel = 10000;
    o.rank = 3;
    o.nodes = AB;
    o.root = A;
    return o;
}

// Shared by criteria 4, 5 and 9.
std::vector<LockstepReport> corpus_reports;
// Shared by criterion 9.
LockstepReport factorial_report;

bool is_determinism(const std::string& rel) { return rel.rfind("determinism", 0) == 0; }

}  // namespace

int main() {
    report(1, "bytecode of the two-closure example", 1.0, [] {
        auto t = test::compile_source(test::kCodeExample);
        std::string got = show_code(t, t.root);
        std::string want = "CLOS (VAR 0; RET); CLOS (CLOS (VAR 1; RET); RET); APPL; END";
        return Verdict_{got == want, got};
    });

    report(2, "CES trace of the two-closure example", 1.0, [] {
        auto t = test::compile_source(test::kCodeExample);
        std::vector<Rule> rules;
        auto o = run_ces(t, 100, [&](std::uint64_t, Rule r, const CesConfig&) { rules.push_back(r); });
        bool seq = rules == std::vector<Rule>{Rule::Clos, Rule::Clos, Rule::Appl, Rule::Var, Rule::Ret};
        if (!seq || o.verdict != Verdict::Halted || o.steps != 5) return Verdict_{false, "wrong trace"};
        // The result is the second closure built at the root.
        const auto& second = std::get<instr::Clos>(t.at(t.root).body.at(1));
        const auto* cl = std::get_if<std::shared_ptr<const CesClosure>>(&*o.value);
        bool ok = cl && (*cl)->code == CodePos{second.code, 0} && (*cl)->env.empty();
        return Verdict_{ok, "steps=5 value=" + show_value(*o.value)};
    });

    report(3, "single-node message-passing trace", 1.0, [] {
        auto t = test::compile_source(test::kCodeExample);
        D1AsyncTrace tr;
        auto o = run_dcesh1(t, 100, Scheduler::fifo(), &tr);
        std::vector<Rule> rules;
        for (const auto& e : tr.events) rules.push_back(e.rule);
        bool seq = rules == std::vector<Rule>{Rule::Clos, Rule::Clos, Rule::ApplSend, Rule::ApplReceive,
                                              Rule::Var, Rule::RetSend, Rule::RetReceive};
        if (!seq || o.verdict != Verdict::Halted || o.steps != 7 || !o.last.msgs.empty()) {
            return Verdict_{false, "wrong trace"};
        }
        const auto& m = o.last.nodes.at(dcesh1_node());
        const auto& th = *m.thread;
        const Code& code = t.at(th.pc.code);
        bool at_end = std::holds_alternative<instr::End>(code.term) && th.pc.offset == code.body.size();
        bool shape = at_end && th.env.empty() && th.stack.elems.size() == 1 && !th.stack.bottom &&
                     std::holds_alternative<Ptr>(th.stack.elems.front());
        return Verdict_{shape, "steps=7 final thread (END, [], ([ptr], nothing))"};
    });

    report(4, "lockstep bisimulation over 100 generated programs", 60.0, [] {
        std::size_t agree = 0;
        std::uint64_t steps = 0;
        std::string first_bad;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            auto t = gen_term(seed, 30, ab);
            auto rep = lockstep(*t, corpus_options());
            steps += rep.steps;
            if (rep.verdict == LockstepVerdict::AllAgree) {
                ++agree;
            } else if (first_bad.empty()) {
                first_bad = "seed " + std::to_string(seed) + ": " + rep.relation + " " + rep.detail;
            }
            corpus_reports.push_back(std::move(rep));
        }
        std::string note = std::to_string(agree) + "/100 AllAgree, " + std::to_string(steps) + " steps";
        if (!first_bad.empty()) note += "; " + first_bad;
        return Verdict_{agree == 100, note};
    });

    report(5, "determinism at every state of criterion 4", 0, [] {
        std::uint64_t checks = 0;
        std::size_t violations = 0;
        for (const auto& r : corpus_reports) {
            checks += r.determinism_checks;
            violations += is_determinism(r.relation);
        }
        bool ok = corpus_reports.size() == 100 && violations == 0 && checks > 0;
        return Verdict_{ok, std::to_string(checks) + " states, " + std::to_string(violations) + " violations"};
    });

    report(6, "heap laws over 1000 random allocation sequences", 5.0, [] {
        std::mt19937_64 rng(6);
        std::size_t violations = 0;
        std::size_t ops = 0;
        for (int run = 0; run < 1000; ++run) {
            Heap<std::uint64_t> h;
            std::vector<std::uint64_t> model;
            std::size_t len = 1 + rng() % 100;
            for (std::size_t k = 0; k < len; ++k, ++ops) {
                std::uint64_t x = rng();
                auto [next, p] = h.alloc(x);
                violations += !(next.deref(p) && *next.deref(p) == x);
                violations += !is_prefix(h, next);
                violations += !is_prefix(next, next);
                // A random earlier cell still holds its value.
                if (!model.empty()) {
                    std::uint32_t i = static_cast<std::uint32_t>(rng() % model.size());
                    violations += !(next.deref(Ptr{i}) && *next.deref(Ptr{i}) == model[i]);
                }
                model.push_back(x);
                h = next;
            }
            violations += h.deref(Ptr{static_cast<std::uint32_t>(model.size())}) != nullptr;
        }
        return Verdict_{violations == 0, std::to_string(ops) + " allocations, " + std::to_string(violations) +
                                              " violations"};
    });

    report(7, "sync and async networks agree on the corpus", 0, [] {
        std::vector<std::pair<std::string, CodeTable>> corpus;
        for (const auto& entry : std::filesystem::directory_iterator(DAM_PROGRAMS_DIR)) {
            if (entry.path().extension() != ".lam") continue;
            corpus.emplace_back(entry.path().filename().string(),
                                test::compile_source(test::read_program(entry.path().filename().string())));
        }
        std::size_t programs = corpus.size();
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            corpus.emplace_back("seed " + std::to_string(seed), compile(*gen_term(seed, 30, ab)));
        }
        std::size_t ok = 0;
        std::string first_bad;
        for (const auto& [name, table] : corpus) {
            auto r = check_async_equiv(table, 10000, AB, A);
            if (r.ok) {
                ++ok;
            } else if (first_bad.empty()) {
                first_bad = name + ": " + r.detail;
            }
        }
        std::string note = std::to_string(ok) + "/" + std::to_string(corpus.size()) + " agree (" +
                           std::to_string(programs) + " sample programs, 100 generated)";
        if (!first_bad.empty()) note += "; " + first_bad;
        return Verdict_{ok == corpus.size() && programs > 0, note};
    });

    report(8, "remote factorial of 5", 1.0, [] {
        auto term = load_source(test::kFactorialRemote).term;
        auto t = compile(*term);
        auto oracle = eval_reference(*term, 1000000);
        const Nat* expected = oracle.value ? std::get_if<Nat>(&*oracle.value) : nullptr;
        auto sync = run_dcesh_sync(t, A, AB, 100000);
        auto async = run_dcesh_async(t, A, AB, 100000);
        auto nat = [](const std::optional<DValue>& v) -> std::optional<Nat> {
            if (!v || !std::holds_alternative<Nat>(*v)) return std::nullopt;
            return std::get<Nat>(*v);
        };
        factorial_report = lockstep(*term, corpus_options());
        bool ok = expected && *expected == 120 && nat(sync.value) == Nat{120} && nat(async.value) == Nat{120} &&
                  sync.stats.comm >= 2 && factorial_report.verdict == LockstepVerdict::AllAgree;
        return Verdict_{ok, "sync=" + (sync.value ? show_value(*sync.value, sync.last) : std::string("-")) +
                                " async=" + (async.value ? show_value(*async.value, async.last.nodes) : "-") +
                                " comm-steps=" + std::to_string(sync.stats.comm)};
    });

    report(9, "one-active and point-to-point invariants in criteria 4 and 8", 0, [] {
        std::uint64_t active = 0, p2p = 0;
        std::size_t violations = 0;
        std::vector<const LockstepReport*> all;
        for (const auto& r : corpus_reports) all.push_back(&r);
        all.push_back(&factorial_report);
        for (const auto* r : all) {
            active += r->one_active_checks;
            p2p += r->point_to_point_checks;
            violations += r->relation == "one-active" || r->relation == "point-to-point";
        }
        bool ok = corpus_reports.size() == 100 && violations == 0 && active > 0 && p2p > 0;
        return Verdict_{ok, std::to_string(active) + " states, " + std::to_string(p2p) + " sends, " +
                                std::to_string(violations) + " violations"};
    });

    std::cout << (failures == 0 ? "all criteria PASS" : std::to_string(failures) + " criteria FAIL") << std::endl;
    return failures == 0 ? 0 : 1;
}
