#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "spin.hpp"

namespace hcp {

/**
 * \brief A partition of the coordinates {0,...,N-1} into d nonempty classes.
 *
 * Classes keep the order they were given in; each class is sorted.
 */
class Partition {
public:
    Partition() = default;

    Partition(std::size_t n, std::vector<std::vector<std::size_t>> classes)
        : n_(n), classes_(std::move(classes)), class_of_(n, npos) {
        if (n == 0) throw invalid_input("partition of an empty coordinate set");
        for (std::size_t k = 0; k < classes_.size(); ++k) {
            auto& c = classes_[k];
            if (c.empty()) throw invalid_input("partition has an empty class");
            std::sort(c.begin(), c.end());
            for (auto i : c) {
                if (i >= n) throw invalid_input("partition index out of range");
                if (class_of_[i] != npos) throw invalid_input("partition classes overlap");
                class_of_[i] = k;
            }
        }
        for (auto k : class_of_)
            if (k == npos) throw invalid_input("partition does not cover all coordinates");
    }

    /// Consecutive blocks of the given sizes.
    static Partition from_sizes(const std::vector<std::size_t>& sizes) {
        std::vector<std::vector<std::size_t>> cls;
        std::size_t at = 0;
        for (auto s : sizes) {
            if (s == 0) throw invalid_input("partition has an empty class");
            std::vector<std::size_t> c(s);
            std::iota(c.begin(), c.end(), at);
            at += s;
            cls.push_back(std::move(c));
        }
        return Partition(at, std::move(cls));
    }

    static Partition trivial(std::size_t n) { return from_sizes({n}); }

    /// d consecutive blocks whose sizes differ by at most one, larger blocks first.
    static Partition equipartition(std::size_t n, std::size_t d) {
        if (d == 0 || d > n) throw invalid_input("equipartition needs 1 <= d <= N");
        std::vector<std::size_t> sizes(d, n / d);
        for (std::size_t k = 0; k < n % d; ++k) ++sizes[k];
        return from_sizes(sizes);
    }

    /**
     * \brief Parses "2,2,4" (consecutive blocks) or "[1,2|3,4]" (explicit 1-based classes).
     *
     * When n is nonzero the parsed partition must cover exactly n coordinates.
     */
    static Partition parse(std::string_view s, std::size_t n = 0) {
        auto trim = [](std::string_view v) {
            while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
            while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
            return v;
        };
        s = trim(s);
        if (s.empty()) throw invalid_input("empty partition string");
        auto numbers = [&](std::string_view v) {
            std::vector<std::size_t> out;
            std::size_t pos = 0;
            while (pos <= v.size()) {
                std::size_t end = v.find(',', pos);
                if (end == std::string_view::npos) end = v.size();
                auto tok = trim(v.substr(pos, end - pos));
                if (tok.empty()) throw invalid_input("empty entry in partition string");
                std::size_t val = 0;
                for (char ch : tok) {
                    if (ch < '0' || ch > '9') throw invalid_input("non-numeric entry in partition string");
                    val = val * 10 + static_cast<std::size_t>(ch - '0');
                }
                out.push_back(val);
                pos = end + 1;
            }
            return out;
        };
        Partition p;
        if (s.front() == '[') {
            if (s.back() != ']') throw invalid_input("unterminated partition string");
            auto body = s.substr(1, s.size() - 2);
            std::vector<std::vector<std::size_t>> cls;
            std::size_t pos = 0, total = 0;
            while (pos <= body.size()) {
                std::size_t end = body.find('|', pos);
                if (end == std::string_view::npos) end = body.size();
                auto c = numbers(body.substr(pos, end - pos));
                for (auto& i : c) {
                    if (i == 0) throw invalid_input("explicit partition indices are 1-based");
                    --i;
                }
                total += c.size();
                cls.push_back(std::move(c));
                pos = end + 1;
            }
            p = Partition(n ? n : total, std::move(cls));
        } else {
            p = from_sizes(numbers(s));
        }
        if (n && p.N() != n) throw invalid_input("partition covers " + std::to_string(p.N()) + " coordinates, expected " + std::to_string(n));
        return p;
    }

    std::size_t N() const { return n_; }
    std::size_t d() const { return classes_.size(); }
    const std::vector<std::size_t>& cls(std::size_t k) const { return classes_[k]; }
    const std::vector<std::vector<std::size_t>>& classes() const { return classes_; }
    std::size_t class_of(std::size_t i) const { return class_of_[i]; }
    std::size_t class_size(std::size_t k) const { return classes_[k].size(); }

    std::vector<std::size_t> sizes() const {
        std::vector<std::size_t> s;
        for (const auto& c : classes_) s.push_back(c.size());
        return s;
    }

    /// True when every class is a consecutive block in order.
    bool is_consecutive() const {
        std::size_t at = 0;
        for (const auto& c : classes_)
            for (auto i : c)
                if (i != at++) return false;
        return true;
    }

    /// Short form when consecutive, explicit 1-based form otherwise.
    std::string to_string() const {
        std::ostringstream os;
        if (is_consecutive()) {
            for (std::size_t k = 0; k < d(); ++k) os << (k ? "," : "") << classes_[k].size();
            return os.str();
        }
        os << '[';
        for (std::size_t k = 0; k < d(); ++k) {
            if (k) os << '|';
            for (std::size_t j = 0; j < classes_[k].size(); ++j) os << (j ? "," : "") << classes_[k][j] + 1;
        }
        os << ']';
        return os.str();
    }

    friend bool operator==(const Partition& a, const Partition& b) { return a.n_ == b.n_ && a.classes_ == b.classes_; }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t n_ = 0;
    std::vector<std::vector<std::size_t>> classes_;
    std::vector<std::size_t> class_of_;
};

/// A point of the lumped grid: n[k] is the number of disagreements with the reference on class k.
struct LumpedPoint {
    std::vector<std::size_t> n;

    friend bool operator==(const LumpedPoint&, const LumpedPoint&) = default;
    friend auto operator<=>(const LumpedPoint&, const LumpedPoint&) = default;

    std::string to_string() const {
        std::string s = "(";
        for (std::size_t k = 0; k < n.size(); ++k) s += (k ? "," : "") + std::to_string(n[k]);
        return s + ")";
    }
};

/// Lumping map sigma -> per-class distance to a reference configuration xi.
class LumpingMap {
public:
    LumpingMap(Partition p, SpinConfig xi) : p_(std::move(p)), xi_(std::move(xi)) {
        if (xi_.size() != p_.N()) throw invalid_input("reference configuration length differs from partition N");
    }

    const Partition& partition() const { return p_; }
    const SpinConfig& reference() const { return xi_; }

    LumpedPoint operator()(const SpinConfig& s) const {
        if (s.size() != p_.N()) throw invalid_input("configuration length differs from partition N");
        LumpedPoint x{std::vector<std::size_t>(p_.d(), 0)};
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s.plus(i) != xi_.plus(i)) ++x.n[p_.class_of(i)];
        return x;
    }

private:
    Partition p_;
    SpinConfig xi_;
};

/**
 * \brief The 2^d configurations obtained from xi by negating whole classes.
 *
 * Entry m negates the classes whose bit is set in m.
 */
inline std::vector<SpinConfig> orbit(const Partition& p, const SpinConfig& xi, std::size_t max_size = std::size_t{1} << 20) {
    if (xi.size() != p.N()) throw invalid_input("reference configuration length differs from partition N");
    if (p.d() >= 63 || (std::size_t{1} << p.d()) > max_size)
        throw too_large("orbit of size 2^" + std::to_string(p.d()) + " exceeds the enumeration limit");
    std::vector<SpinConfig> out;
    out.reserve(std::size_t{1} << p.d());
    for (std::size_t m = 0; m < (std::size_t{1} << p.d()); ++m) {
        SpinConfig s = xi;
        for (std::size_t k = 0; k < p.d(); ++k)
            if ((m >> k) & 1)
                for (auto i : p.cls(k)) s.flip(i);
        out.push_back(std::move(s));
    }
    return out;
}

/// True when every configuration of a is constant relative to xi on each class.
inline bool is_compatible(const Partition& p, const SpinConfig& xi, const SpinSet& a) {
    if (xi.size() != p.N()) throw invalid_input("reference configuration length differs from partition N");
    for (const auto& s : a) {
        if (s.size() != p.N()) throw invalid_input("configuration length differs from partition N");
        for (const auto& c : p.classes()) {
            bool first = s.plus(c.front()) == xi.plus(c.front());
            for (auto i : c)
                if ((s.plus(i) == xi.plus(i)) != first) return false;
        }
    }
    return true;
}

/**
 * \brief Groups coordinates i by the column (sigma_i * xi_i) over sigma in a.
 *
 * The result is compatible with a relative to xi and has at most 2^|a| classes.
 * Classes are ordered by their smallest coordinate.
 */
inline Partition build_partition_from_set(const SpinSet& a, const SpinConfig& xi) {
    if (a.empty()) throw invalid_input("cannot build a partition from an empty set");
    std::size_t n = a.dimension();
    if (xi.size() != n) throw invalid_input("reference configuration length differs from set dimension");
    std::map<std::vector<bool>, std::size_t> index;
    std::vector<std::vector<std::size_t>> cls;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<bool> col(a.size());
        for (std::size_t m = 0; m < a.size(); ++m) col[m] = a[m].plus(i) == xi.plus(i);
        auto [it, fresh] = index.emplace(col, cls.size());
        if (fresh) cls.emplace_back();
        cls[it->second].push_back(i);
    }
    return Partition(n, std::move(cls));
}

inline Partition build_partition_from_set(const SpinSet& a) {
    if (a.empty()) throw invalid_input("cannot build a partition from an empty set");
    return build_partition_from_set(a, SpinConfig::all_plus(a.dimension()));
}

/// Splits every class according to whether s agrees with xi there.
inline Partition refine_partition_for_point(const Partition& p, const SpinConfig& s, const SpinConfig& xi) {
    if (s.size() != p.N() || xi.size() != p.N()) throw invalid_input("configuration length differs from partition N");
    std::vector<std::vector<std::size_t>> cls;
    for (const auto& c : p.classes()) {
        std::vector<std::size_t> agree, differ;
        for (auto i : c) (s.plus(i) == xi.plus(i) ? agree : differ).push_back(i);
        if (!agree.empty()) cls.push_back(std::move(agree));
        if (!differ.empty()) cls.push_back(std::move(differ));
    }
    return Partition(p.N(), std::move(cls));
}

inline Partition refine_partition_for_point(const Partition& p, const SpinConfig& s) {
    return refine_partition_for_point(p, s, SpinConfig::all_plus(p.N()));
}

} // namespace hcp
