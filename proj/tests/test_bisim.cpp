#include <doctest.h>

#include "dam/bisim.hpp"
#include "support.hpp"

using namespace dam;

namespace {

const NodeName A("A");
const NodeName B("B");
const std::set<NodeName> AB{A, B};
const std::vector<NodeName> ab{A, B};

LockstepOptions options(std::uint64_t fuel = 10000) {
    LockstepOptions o;
    o.fuel = fuel;
    o.rank = 3;
    o.nodes = AB;
    o.root = A;
    return o;
}

std::optional<Nat> ref_nat(const CoreTerm& t, std::uint64_t fuel = 1000000) {
    auto o = eval_reference(t, fuel);
    if (o.verdict != Verdict::Halted) return std::nullopt;
    const Nat* n = std::get_if<Nat>(&*o.value);
    return n ? std::optional<Nat>(*n) : std::nullopt;
}

std::string factorial_of(Nat n) {
    return "let z = fn f. (fn x. f (fn v. x x v)) (fn x. f (fn v. x x v)) in "
           "let fact = z (fn self. fn n. if0 n then 1 else n * self (n - 1)) in fact " +
           std::to_string(n);
}

}  // namespace

TEST_CASE("reference evaluator") {
    auto ex = eval_reference(*load_source(test::kCodeExample).term, 100);
    REQUIRE(ex.verdict == Verdict::Halted);
    const auto& cl = std::get<std::shared_ptr<const RefClosure>>(*ex.value);
    CHECK(*cl->body == *term::lam(term::var(1)));
    CHECK(cl->env.empty());
    CHECK(ref_nat(*term::lit(3)) == Nat{3});
    CHECK(ref_nat(*load_source(test::kFactorial).term) == Nat{120});
    CHECK(eval_reference(*term::app(term::lit(1), term::lit(2)), 100).verdict == Verdict::Stuck);
    CHECK(eval_reference(*load_source("(fn x. x x) (fn x. x x)").term, 10000).verdict == Verdict::FuelExhausted);
}

TEST_CASE("reference factorial matches hand-unrolled factorial for 0..3") {
    // f0 is the base case; f(k+1) calls f(k) directly.
    const char* unrolled[] = {
        "(fn n. if0 n then 1 else 0) 0",
        "let f0 = fn n. 1 in (fn n. if0 n then 1 else n * f0 (n - 1)) 1",
        "let f0 = fn n. 1 in let f1 = fn n. if0 n then 1 else n * f0 (n - 1) in "
        "(fn n. if0 n then 1 else n * f1 (n - 1)) 2",
        "let f0 = fn n. 1 in let f1 = fn n. if0 n then 1 else n * f0 (n - 1) in "
        "let f2 = fn n. if0 n then 1 else n * f1 (n - 1) in (fn n. if0 n then 1 else n * f2 (n - 1)) 3",
    };
    const Nat expected[] = {1, 1, 2, 6};
    for (Nat n = 0; n <= 3; ++n) {
        auto direct = ref_nat(*load_source(unrolled[n]).term);
        CHECK(direct == expected[n]);
        CHECK(ref_nat(*load_source(factorial_of(n)).term) == direct);
    }
}

TEST_CASE("R_Cfg on simple configurations") {
    auto t = test::compile_source(test::kCodeExample);
    auto ces = ces_initial(t);
    auto cesh = cesh_initial(t);
    CHECK(r_cfg(ces, cesh));
    auto c1 = std::get<Next<CesConfig>>(step_ces(ces, t)).cfg;
    auto h1 = std::get<Next<CeshConfig>>(step_cesh(cesh, t)).cfg;
    CHECK(r_cfg(c1, h1));
    // Same shape, but the CESH pointer is dangling.
    auto dangling = h1;
    dangling.stack = dangling.stack.pop().push(CeshElem{CeshValue{Ptr{9}}});
    CHECK_FALSE(r_cfg(c1, dangling));
    // Out of step.
    CHECK_FALSE(r_cfg(ces, h1));
}

TEST_CASE("R_Sync on simple configurations") {
    auto t = test::compile_source(test::kFactorialRemote);
    auto cesh = cesh_initial(t);
    auto net = initial_network(t, A, AB);
    for (std::size_t k = 0; k <= 5; ++k) CHECK(r_sync(cesh, net, k));
    auto two = net;
    two[B] = two[A];
    CHECK_FALSE(r_sync(cesh, two, 3));
}

TEST_CASE("R_Sync is monotone in the rank along runs") {
    std::size_t violations = 0;
    std::size_t related = 0;
    for (std::uint64_t s = 0; s < 60; ++s) {
        auto t = compile(*gen_term(s, 30, ab));
        DceshSemantics sem(t);
        auto cesh = cesh_initial(t);
        auto net = initial_network(t, A, AB);
        for (int step = 0; step < 300; ++step) {
            bool prev = true;
            for (std::size_t k = 0; k <= 5; ++k) {
                bool now = r_sync(cesh, net, k);
                violations += now && !prev;
                prev = now;
            }
            related += r_sync(cesh, net, 3);
            auto hs = enumerate_cesh_successors(cesh, t);
            auto r = sync_step(net, sem);
            auto* st = std::get_if<SyncStepped<DMachine, DMsg>>(&r);
            if (hs.empty() || !st) break;
            cesh = hs.front().second;
            net = st->net;
        }
    }
    CHECK(violations == 0);
    CHECK(related > 0);
}

TEST_CASE("lockstep on the two-closure example") {
    auto rep = lockstep(*load_source(test::kCodeExample).term, options(100));
    CHECK(rep.verdict == LockstepVerdict::AllAgree);
    CHECK(rep.outcome == Verdict::Halted);
    CHECK(rep.steps == 5);
    CHECK(rep.value == "clos");
    CHECK(rep.ces_rules == std::vector<Rule>{Rule::Clos, Rule::Clos, Rule::Appl, Rule::Var, Rule::Ret});
    CHECK(rep.cesh_rules == rep.ces_rules);
}

TEST_CASE("lockstep on remote factorial") {
    auto rep = lockstep(*load_source(test::kFactorialRemote).term, options());
    CHECK(rep.verdict == LockstepVerdict::AllAgree);
    CHECK(rep.nat == Nat{120});
    CHECK(rep.comm_steps >= 2);
    CHECK(rep.one_active_checks == rep.steps + 1);
    CHECK(rep.point_to_point_checks == rep.comm_steps);
}

TEST_CASE("lockstep over generated programs") {
    std::size_t failures = 0;
    std::size_t halted = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        auto t = gen_term(s, 30, ab);
        auto rep = lockstep(*t, options());
        if (rep.verdict != LockstepVerdict::AllAgree) {
            ++failures;
            MESSAGE("seed " << s << ": " << rep.relation << " " << rep.detail);
        }
        halted += rep.outcome == Verdict::Halted;
        CHECK(rep.determinism_checks > 0);
    }
    CHECK(failures == 0);
    CHECK(halted > 50);
}

TEST_CASE("corrupting the heap breaks the relation at that step") {
    auto t = *load_source(test::kFactorial).term;
    for (std::uint64_t at : {3, 40, 100}) {
        auto opts = options();
        opts.mutate = [at](std::uint64_t step, CeshConfig& c) {
            if (step == at) REQUIRE(corrupt_reachable_cell(c));
        };
        auto rep = lockstep(t, opts);
        CHECK(rep.verdict == LockstepVerdict::RelationBroken);
        CHECK(rep.steps == at);
    }
}

TEST_CASE("machines agree with the reference evaluator") {
    std::size_t compared = 0;
    for (std::uint64_t s = 0; s < 300; ++s) {
        auto t = gen_term(s, 30, ab);
        auto rep = lockstep(*t, options());
        REQUIRE(rep.verdict == LockstepVerdict::AllAgree);
        auto ref = eval_reference(*t, 1000000);
        if (rep.outcome == Verdict::Halted && ref.verdict == Verdict::Halted) {
            ++compared;
            const Nat* n = std::get_if<Nat>(&*ref.value);
            CHECK(rep.nat == (n ? std::optional<Nat>(*n) : std::nullopt));
        }
        // A stuck machine means the program really goes wrong.
        if (rep.outcome == Verdict::Stuck) CHECK(ref.verdict == Verdict::Stuck);
    }
    CHECK(compared > 150);
}

TEST_CASE("placement does not change results") {
    std::vector<NodeName> abc{A, B, NodeName("C")};
    auto opts = options();
    opts.nodes = {A, B, NodeName("C")};
    for (std::uint64_t s = 0; s < 100; ++s) {
        auto t = gen_term(s, 30, ab);
        auto base = lockstep(*t, opts);
        auto moved = replace_placements(*t, s + 1, abc);
        auto rep = lockstep(*moved, opts);
        CHECK(rep.verdict == LockstepVerdict::AllAgree);
        CHECK(rep.outcome == base.outcome);
        CHECK(rep.nat == base.nat);
    }
    auto fact = replace_placements(*load_source(test::kFactorialRemote).term, 7, abc);
    CHECK(lockstep(*fact, opts).nat == Nat{120});
}

TEST_CASE("sync and async networks agree") {
    auto local = test::compile_source(test::kCodeExample);
    auto r1 = check_async_equiv(local, 100, AB, A);
    CHECK(r1.ok);
    CHECK(r1.async_steps == r1.sync_steps);

    auto remote = test::compile_source("((fn x. x) @ B) 4");
    auto r2 = check_async_equiv(remote, 100, AB, A);
    CHECK(r2.ok);
    CHECK(r2.comm == 4);
    CHECK(r2.async_steps == r2.sync_steps + r2.comm);

    std::size_t failures = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        auto r = check_async_equiv(compile(*gen_term(s, 30, ab)), 10000, AB, A, s);
        if (!r.ok) {
            ++failures;
            MESSAGE("seed " << s << ": " << r.detail);
        }
    }
    CHECK(failures == 0);
}

TEST_CASE("R_Sync rejects a corrupted heap mid-run") {
    auto t = test::compile_source(test::kFactorialRemote);
    DceshSemantics sem(t);
    auto cesh = cesh_initial(t);
    auto net = initial_network(t, A, AB);
    std::size_t detected = 0;
    std::size_t tried = 0;
    for (int step = 0; step < 130; ++step) {
        REQUIRE(r_sync(cesh, net, 3));
        auto broken = cesh;
        if (corrupt_reachable_cell(broken)) {
            ++tried;
            detected += !r_sync(broken, net, 3);
        }
        auto hs = enumerate_cesh_successors(cesh, t);
        auto r = sync_step(net, sem);
        auto* st = std::get_if<SyncStepped<DMachine, DMsg>>(&r);
        if (hs.empty() || !st) break;
        cesh = hs.front().second;
        net = st->net;
    }
    CHECK(tried > 50);
    CHECK(detected == tried);
}
