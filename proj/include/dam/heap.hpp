#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <utility>

namespace dam {

struct Ptr {
    std::uint32_t index = 0;

    friend auto operator<=>(const Ptr&, const Ptr&) = default;
    friend bool operator==(const Ptr&, const Ptr&) = default;
};

// Append-only heap. Cells are never mutated once allocated, so copies of a
// heap share one buffer; a copy that is not at the buffer's tip clones on
// its next allocation.
template <class T>
class Heap {
public:
    Heap() = default;

    std::size_t size() const { return size_; }

    std::pair<Heap, Ptr> alloc(T x) const {
        Heap h = *this;
        if (!h.cells_ || h.cells_->size() != size_) {
            auto fresh = std::make_shared<std::deque<T>>();
            if (cells_) fresh->assign(cells_->begin(), cells_->begin() + static_cast<std::ptrdiff_t>(size_));
            h.cells_ = std::move(fresh);
        }
        h.cells_->push_back(std::move(x));
        h.size_ = size_ + 1;
        return {std::move(h), Ptr{static_cast<std::uint32_t>(size_)}};
    }

    const T* deref(Ptr p) const {
        if (p.index >= size_) return nullptr;
        return &(*cells_)[p.index];
    }

    const T& operator[](std::size_t i) const { return (*cells_)[i]; }

    // Copy of this heap with one cell overwritten. Breaks monotonicity on
    // purpose; used only to corrupt runs in mutation tests.
    Heap with_cell_replaced(Ptr p, T x) const {
        Heap h;
        h.cells_ = std::make_shared<std::deque<T>>(cells_->begin(),
                                                   cells_->begin() + static_cast<std::ptrdiff_t>(size_));
        (*h.cells_)[p.index] = std::move(x);
        h.size_ = size_;
        return h;
    }

    template <class U>
    friend bool is_prefix(const Heap<U>& a, const Heap<U>& b);

    friend bool operator==(const Heap& a, const Heap& b) { return a.size_ == b.size_ && is_prefix(a, b); }

private:
    std::shared_ptr<std::deque<T>> cells_;
    std::size_t size_ = 0;
};

template <class T>
bool is_prefix(const Heap<T>& a, const Heap<T>& b) {
    if (a.size_ > b.size_) return false;
    if (a.size_ == 0 || a.cells_ == b.cells_) return true;
    for (std::size_t i = 0; i < a.size_; ++i) {
        if (!((*a.cells_)[i] == (*b.cells_)[i])) return false;
    }
    return true;
}

}  // namespace dam
