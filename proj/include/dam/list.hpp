#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace dam {

// Immutable cons list. Copies share structure; push/pop are O(1).
template <class T>
class List {
    struct Node {
        T head;
        List tail;
    };

public:
    List() = default;
    List(const List&) = default;
    List(List&&) noexcept = default;
    List& operator=(const List&) = default;
    List& operator=(List&&) noexcept = default;

    // Iterative teardown so long lists do not overflow the call stack.
    ~List() {
        while (node_ && node_.use_count() == 1) {
            std::shared_ptr<const Node> next = std::move(const_cast<Node&>(*node_).tail.node_);
            node_ = std::move(next);
        }
    }

    static List of(std::initializer_list<T> xs) {
        List out;
        for (auto it = std::rbegin(xs); it != std::rend(xs); ++it) out = out.push(*it);
        return out;
    }

    bool empty() const { return !node_; }
    std::size_t size() const { return size_; }

    const T& front() const { return node_->head; }
    const List& pop() const { return node_->tail; }

    List push(T x) const {
        List out;
        out.node_ = std::make_shared<Node>(Node{std::move(x), *this});
        out.size_ = size_ + 1;
        return out;
    }

    const T* at(std::size_t k) const {
        const List* l = this;
        while (k > 0 && l->node_) {
            l = &l->node_->tail;
            --k;
        }
        return l->node_ ? &l->node_->head : nullptr;
    }

    bool same_cell(const List& other) const { return node_ == other.node_; }
    const void* id() const { return node_.get(); }

    class iterator {
    public:
        explicit iterator(const List* l) : l_(l) {}
        const T& operator*() const { return l_->node_->head; }
        const T* operator->() const { return &l_->node_->head; }
        iterator& operator++() {
            l_ = &l_->node_->tail;
            return *this;
        }
        bool operator==(const iterator& o) const { return l_->node_ == o.l_->node_; }
        bool operator!=(const iterator& o) const { return !(*this == o); }

    private:
        const List* l_;
    };

    iterator begin() const { return iterator(this); }
    iterator end() const { return iterator(&nil()); }

    std::vector<T> to_vector() const {
        std::vector<T> out;
        out.reserve(size_);
        for (const auto& x : *this) out.push_back(x);
        return out;
    }

    friend bool operator==(const List& a, const List& b) {
        if (a.size_ != b.size_) return false;
        auto i = a.begin();
        auto j = b.begin();
        for (; i != a.end(); ++i, ++j) {
            if (i.operator->() == j.operator->()) return true;
            if (!(*i == *j)) return false;
        }
        return true;
    }

private:
    static const List& nil() {
        static const List n;
        return n;
    }

    std::shared_ptr<const Node> node_;
    std::size_t size_ = 0;
};

}  // namespace dam
