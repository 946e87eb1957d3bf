#include <doctest.h>

#include <random>

#include "dam/heap.hpp"
#include "dam/list.hpp"

using namespace dam;

TEST_CASE("empty heap") {
    Heap<int> h;
    CHECK(h.size() == 0);
    CHECK(h.deref(Ptr{0}) == nullptr);
    CHECK(h.deref(Ptr{7}) == nullptr);
}

TEST_CASE("alloc then deref") {
    Heap<int> h;
    auto [h1, p] = h.alloc(42);
    CHECK(p == Ptr{0});
    CHECK(h1.size() == 1);
    REQUIRE(h1.deref(p) != nullptr);
    CHECK(*h1.deref(p) == 42);
    auto [h2, q] = h1.alloc(43);
    CHECK(p != q);
    CHECK(*h2.deref(p) == 42);
    CHECK(*h2.deref(q) == 43);
}

TEST_CASE("prefix order") {
    Heap<int> h;
    auto [h1, p] = h.alloc(1);
    CHECK(is_prefix(h1, h1));
    CHECK(is_prefix(h, h1));
    CHECK_FALSE(is_prefix(h1, h));
    // Two heaps grown from the same parent are not prefixes of each other.
    auto [a, pa] = h1.alloc(2);
    auto [b, pb] = h1.alloc(3);
    CHECK(pa == pb);
    CHECK(*a.deref(pa) == 2);
    CHECK(*b.deref(pb) == 3);
    CHECK_FALSE(is_prefix(a, b));
    CHECK(is_prefix(h1, a));
    CHECK(is_prefix(h1, b));
}

TEST_CASE("heap laws over random allocation sequences") {
    std::mt19937_64 rng(2024);
    std::size_t violations = 0;
    for (int run = 0; run < 1000; ++run) {
        // Each heap is paired with a plain vector holding the expected cells.
        std::vector<std::pair<Heap<std::uint64_t>, std::vector<std::uint64_t>>> history(1);
        std::size_t len = rng() % 60;
        for (std::size_t k = 0; k < len; ++k) {
            // Sometimes branch off an older heap to exercise sharing.
            std::size_t from = rng() % 4 == 0 ? rng() % history.size() : history.size() - 1;
            auto [base, model] = history[from];
            std::uint64_t x = rng();
            auto [next, p] = base.alloc(x);
            violations += !(next.deref(p) && *next.deref(p) == x);
            violations += !is_prefix(base, next);
            violations += is_prefix(next, base);
            violations += p.index != base.size();
            violations += next.deref(Ptr{static_cast<std::uint32_t>(next.size())}) != nullptr;
            model.push_back(x);
            history.emplace_back(next, model);
        }
        for (const auto& [h, model] : history) {
            violations += !is_prefix(h, h);
            violations += h.size() != model.size();
            for (std::uint32_t i = 0; i < model.size(); ++i) {
                violations += !(h.deref(Ptr{i}) && *h.deref(Ptr{i}) == model[i]);
            }
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("persistent lists") {
    auto l = List<int>::of({1, 2, 3});
    CHECK(l.size() == 3);
    CHECK(l.front() == 1);
    CHECK(*l.at(2) == 3);
    CHECK(l.at(3) == nullptr);
    auto m = l.push(0);
    CHECK(m.size() == 4);
    CHECK(l.size() == 3);
    CHECK(m.pop().same_cell(l));
    CHECK(m.to_vector() == std::vector<int>{0, 1, 2, 3});
    CHECK(List<int>::of({1, 2, 3}) == l);
    // Long lists must not overflow the stack on destruction.
    List<int> big;
    for (int i = 0; i < 1000000; ++i) big = big.push(i);
    CHECK(big.size() == 1000000);
}
