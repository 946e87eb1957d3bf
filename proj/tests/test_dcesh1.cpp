#include <doctest.h>

#include <algorithm>

#include "dam/dcesh1.hpp"
#include "support.hpp"

using namespace dam;

namespace {

std::vector<Rule> async_rules(const D1AsyncTrace& tr) {
    std::vector<Rule> out;
    for (const auto& e : tr.events) out.push_back(e.rule);
    return out;
}

}  // namespace

TEST_CASE("two-closure example: seven steps through messages") {
    auto t = test::compile_source(test::kCodeExample);
    D1AsyncTrace tr;
    auto o = run_dcesh1(t, 100, Scheduler::fifo(), &tr);
    CHECK(async_rules(tr) == std::vector<Rule>{Rule::Clos, Rule::Clos, Rule::ApplSend, Rule::ApplReceive, Rule::Var,
                                               Rule::RetSend, Rule::RetReceive});
    REQUIRE(o.verdict == Verdict::Halted);
    CHECK(o.steps == 7);
    CHECK(o.last.msgs.empty());
    const auto& m = o.last.nodes.at(dcesh1_node());
    REQUIRE(m.thread.has_value());
    // Final thread: (END, [], ([closure pointer], nothing)).
    const auto& th = *m.thread;
    CHECK(std::holds_alternative<instr::End>(t.at(th.pc.code).term));
    CHECK(th.pc.offset == t.at(th.pc.code).body.size());
    CHECK(th.env.empty());
    CHECK(th.stack.elems.size() == 1);
    CHECK_FALSE(th.stack.bottom.has_value());
    const Ptr* p = std::get_if<Ptr>(&th.stack.elems.front());
    REQUIRE(p != nullptr);
    CHECK(*p == Ptr{1});
    CHECK(show_code(t, m.clos_heap.deref(*p)->code.code) == "CLOS (VAR 1; RET); RET");
    CHECK(m.clos_heap.size() == 2);
    CHECK(m.cont_heap.size() == 1);
    CHECK(o.stats.sends == 2);
    CHECK(o.stats.receives == 2);
    CHECK(o.stats.max_inflight == 1);
}

TEST_CASE("inactive machine has no step") {
    auto t = compile(*term::lit(3));
    Dcesh1Semantics sem(t, dcesh1_node());
    D1Machine idle;
    CHECK(sem.active_steps(dcesh1_node(), idle).empty());
    D1Net net{{{dcesh1_node(), idle}}, {}};
    CHECK(enumerate_async_steps(net, sem).empty());
}

TEST_CASE("return to an unallocated continuation is refused") {
    auto t = compile(*term::lit(3));
    Dcesh1Semantics sem(t, dcesh1_node());
    D1Machine idle;
    auto r = sem.receive(dcesh1_node(), idle, d1msg::Ret{Ptr{5}, D1Value{Nat{1}}});
    REQUIRE(std::holds_alternative<Refusal>(r));
    CHECK(std::get<Refusal>(r).reason.find("dangling") != std::string::npos);
    D1Net net{{{dcesh1_node(), idle}}, {d1msg::Ret{Ptr{5}, D1Value{Nat{1}}}}};
    auto o = run_async(net, sem, 10, Scheduler::fifo(), [&](const SyncNet<D1Machine>&) {
        return std::optional<D1Value>{};
    });
    CHECK(o.verdict == Verdict::Stuck);
}

TEST_CASE("receive while running has no rule") {
    auto t = compile(*term::lit(3));
    Dcesh1Semantics sem(t, dcesh1_node());
    auto busy = dcesh1_initial(t);
    auto r = sem.receive(dcesh1_node(), busy, d1msg::Ret{Ptr{0}, D1Value{Nat{1}}});
    CHECK(std::holds_alternative<Refusal>(r));
}

TEST_CASE("literal and factorial") {
    auto lit = run_dcesh1(compile(*term::lit(3)), 10);
    REQUIRE(lit.verdict == Verdict::Halted);
    CHECK(std::get<Nat>(*lit.value) == 3);
    auto fact = run_dcesh1(test::compile_source(test::kFactorial), 100000);
    REQUIRE(fact.verdict == Verdict::Halted);
    CHECK(std::get<Nat>(*fact.value) == 120);
}

TEST_CASE("remote code is rejected") {
    CHECK_THROWS_AS(run_dcesh1(test::compile_source(test::kFactorialRemote), 1000), InputError);
}

TEST_CASE("every send is received exactly once") {
    std::size_t unmatched = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        auto t = compile(*gen_term(s, 30, {}));
        D1AsyncTrace tr;
        auto o = run_dcesh1(t, 5000, Scheduler::fifo(), &tr);
        if (o.verdict != Verdict::Halted) continue;
        std::vector<D1Msg> pending;
        for (const auto& e : tr.events) {
            if (e.kind == AsyncKind::Send) pending.push_back(*e.msg);
            if (e.kind == AsyncKind::Receive) {
                auto it = std::find(pending.begin(), pending.end(), *e.msg);
                if (it == pending.end()) {
                    ++unmatched;
                } else {
                    pending.erase(it);
                }
            }
        }
        unmatched += pending.size();
    }
    CHECK(unmatched == 0);
}

TEST_CASE("sync and async single-node runs agree") {
    for (std::uint64_t s = 0; s < 200; ++s) {
        auto t = compile(*gen_term(s, 30, {}));
        Dcesh1Semantics sem(t, dcesh1_node());
        SyncNet<D1Machine> net{{dcesh1_node(), dcesh1_initial(t)}};
        auto halted = [&](const SyncNet<D1Machine>& n) { return sem.halted(n.at(dcesh1_node())); };
        auto sy = run_sync(net, sem, 5000, halted);
        auto as = run_dcesh1(t, sy.stats.silent + 2 * sy.stats.comm);
        CHECK(sy.verdict == as.verdict);
        CHECK(sy.value == as.value);
        CHECK(sy.last == as.last.nodes);
    }
}
