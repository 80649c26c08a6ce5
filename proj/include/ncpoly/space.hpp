#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "ncpoly/errors.hpp"

namespace ncpoly {

// A finite set of labeled atoms carrying its full power-set sigma-algebra.
// Label order is the canonical atom index order.
class FiniteSpace {
public:
    FiniteSpace() = default;
    explicit FiniteSpace(std::vector<std::string> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw DomainError("FiniteSpace: at least one atom required");
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
                if (atoms_[i] == atoms_[j]) {
                    throw DomainError("FiniteSpace: duplicate atom label '" + atoms_[i] + "'");
                }
            }
        }
    }

    int size() const { return static_cast<int>(atoms_.size()); }
    const std::vector<std::string>& atoms() const { return atoms_; }
    const std::string& label(int i) const { return atoms_.at(static_cast<std::size_t>(i)); }

    int index_of(const std::string& label) const {
        auto it = std::find(atoms_.begin(), atoms_.end(), label);
        if (it == atoms_.end()) throw DomainError("FiniteSpace: unknown atom '" + label + "'");
        return static_cast<int>(it - atoms_.begin());
    }

    bool operator==(const FiniteSpace& other) const { return atoms_ == other.atoms_; }
    bool operator!=(const FiniteSpace& other) const { return !(*this == other); }

private:
    std::vector<std::string> atoms_;
};

// An event is a canonical (sorted, duplicate-free) set of atom indices.
class Event {
public:
    Event(FiniteSpace space, std::vector<int> members) : space_(std::move(space)) {
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        for (int i : members) {
            if (i < 0 || i >= space_.size()) {
                throw DomainError("Event: atom index " + std::to_string(i) + " out of range");
            }
        }
        members_ = std::move(members);
    }

    static Event empty(const FiniteSpace& s) { return Event(s, {}); }

    static Event full(const FiniteSpace& s) {
        std::vector<int> all(static_cast<std::size_t>(s.size()));
        for (int i = 0; i < s.size(); ++i) all[static_cast<std::size_t>(i)] = i;
        return Event(s, std::move(all));
    }

    static Event from_labels(const FiniteSpace& s, const std::vector<std::string>& labels) {
        std::vector<int> idx;
        idx.reserve(labels.size());
        for (const auto& l : labels) idx.push_back(s.index_of(l));
        return Event(s, std::move(idx));
    }

    // Members of the event encoded in bit i of `mask`.
    static Event from_mask(const FiniteSpace& s, std::uint64_t mask) {
        std::vector<int> idx;
        for (int i = 0; i < s.size(); ++i) {
            if (mask & (std::uint64_t{1} << i)) idx.push_back(i);
        }
        return Event(s, std::move(idx));
    }

    const FiniteSpace& space() const { return space_; }
    const std::vector<int>& members() const { return members_; }
    int size() const { return static_cast<int>(members_.size()); }
    bool is_empty() const { return members_.empty(); }
    bool is_full() const { return size() == space_.size(); }

    bool contains(int atom) const {
        return std::binary_search(members_.begin(), members_.end(), atom);
    }

    bool subset_of(const Event& other) const {
        require_same_space(other);
        return std::includes(other.members_.begin(), other.members_.end(), members_.begin(),
                             members_.end());
    }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        out.reserve(members_.size());
        for (int i : members_) out.push_back(space_.label(i));
        return out;
    }

    // Canonical display form, e.g. "{a,c}"; doubles as a kernel index label.
    std::string to_label() const {
        std::string s = "{";
        bool first = true;
        for (int i : members_) {
            if (!first) s += ",";
            s += space_.label(i);
            first = false;
        }
        return s + "}";
    }

    bool operator==(const Event& other) const {
        return space_ == other.space_ && members_ == other.members_;
    }

    friend Event operator|(const Event& a, const Event& b) {
        a.require_same_space(b);
        std::vector<int> out;
        std::set_union(a.members_.begin(), a.members_.end(), b.members_.begin(), b.members_.end(),
                       std::back_inserter(out));
        return Event(a.space_, std::move(out));
    }

    friend Event operator&(const Event& a, const Event& b) {
        a.require_same_space(b);
        std::vector<int> out;
        std::set_intersection(a.members_.begin(), a.members_.end(), b.members_.begin(),
                              b.members_.end(), std::back_inserter(out));
        return Event(a.space_, std::move(out));
    }

    friend Event operator~(const Event& a) {
        std::vector<int> out;
        for (int i = 0; i < a.space_.size(); ++i) {
            if (!a.contains(i)) out.push_back(i);
        }
        return Event(a.space_, std::move(out));
    }

    bool disjoint_from(const Event& other) const { return (*this & other).is_empty(); }

private:
    void require_same_space(const Event& other) const {
        if (space_ != other.space_) {
            throw DomainError("Event: operands live on different spaces");
        }
    }

    FiniteSpace space_;
    std::vector<int> members_;
};

// All 2^n events, ordered by atom-index bitmask. Capped: a full sweep above 12
// atoms is never useful at desk scale.
inline std::vector<Event> all_events(const FiniteSpace& s) {
    if (s.size() > 12) {
        throw DomainError("all_events: space has " + std::to_string(s.size()) +
                          " atoms; exhaustive enumeration capped at 12");
    }
    std::vector<Event> out;
    std::uint64_t count = std::uint64_t{1} << s.size();
    out.reserve(static_cast<std::size_t>(count));
    for (std::uint64_t mask = 0; mask < count; ++mask) out.push_back(Event::from_mask(s, mask));
    return out;
}

inline std::vector<Event> atom_events(const FiniteSpace& s) {
    std::vector<Event> out;
    out.reserve(static_cast<std::size_t>(s.size()));
    for (int i = 0; i < s.size(); ++i) out.push_back(Event(s, {i}));
    return out;
}

// X1 x X2 with pairs in lexicographic (left index, right index) order, matching
// the Kronecker block convention: pair (a,b) sits at flat index a*|X2| + b.
class ProductSpace {
public:
    ProductSpace(FiniteSpace left, FiniteSpace right)
        : left_(std::move(left)), right_(std::move(right)), flat_(make_flat(left_, right_)) {}

    const FiniteSpace& left() const { return left_; }
    const FiniteSpace& right() const { return right_; }
    const FiniteSpace& flat() const { return flat_; }

    int pair_index(int a, int b) const { return a * right_.size() + b; }
    int left_of(int flat_index) const { return flat_index / right_.size(); }
    int right_of(int flat_index) const { return flat_index % right_.size(); }

    const FiniteSpace& factor(int coordinate) const {
        if (coordinate == 1) return left_;
        if (coordinate == 2) return right_;
        throw DomainError("ProductSpace: coordinate must be 1 or 2");
    }

    bool operator==(const ProductSpace& other) const {
        return left_ == other.left_ && right_ == other.right_;
    }

private:
    static FiniteSpace make_flat(const FiniteSpace& l, const FiniteSpace& r) {
        std::vector<std::string> atoms;
        atoms.reserve(static_cast<std::size_t>(l.size()) * static_cast<std::size_t>(r.size()));
        for (const auto& a : l.atoms()) {
            for (const auto& b : r.atoms()) atoms.push_back(a + "|" + b);
        }
        return FiniteSpace(std::move(atoms));
    }

    FiniteSpace left_;
    FiniteSpace right_;
    FiniteSpace flat_;
};

inline ProductSpace product(const FiniteSpace& left, const FiniteSpace& right) {
    return ProductSpace(left, right);
}

// pi_i^{-1}(A): coordinate 1 gives A x X2, coordinate 2 gives X1 x A.
inline Event preimage(const ProductSpace& p, int coordinate, const Event& a) {
    if (a.space() != p.factor(coordinate)) {
        throw DomainError("preimage: event does not live on coordinate " +
                          std::to_string(coordinate));
    }
    std::vector<int> members;
    if (coordinate == 1) {
        for (int i : a.members()) {
            for (int b = 0; b < p.right().size(); ++b) members.push_back(p.pair_index(i, b));
        }
    } else {
        for (int j : a.members()) {
            for (int al = 0; al < p.left().size(); ++al) members.push_back(p.pair_index(al, j));
        }
    }
    return Event(p.flat(), std::move(members));
}

// A x B as an event of the flat product space.
inline Event rectangle(const ProductSpace& p, const Event& a, const Event& b) {
    if (a.space() != p.left() || b.space() != p.right()) {
        throw DomainError("rectangle: events do not live on the product factors");
    }
    std::vector<int> members;
    members.reserve(static_cast<std::size_t>(a.size()) * static_cast<std::size_t>(b.size()));
    for (int i : a.members()) {
        for (int j : b.members()) members.push_back(p.pair_index(i, j));
    }
    return Event(p.flat(), std::move(members));
}

}  // namespace ncpoly
