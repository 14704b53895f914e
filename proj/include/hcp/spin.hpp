#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace hcp {

/**
 * \brief A point of {-1,+1}^N stored as packed bits (bit set means +1).
 *
 * Coordinates are 0-based internally; textual forms list coordinate 1 first.
 */
class SpinConfig {
public:
    SpinConfig() = default;

    explicit SpinConfig(std::size_t n, bool plus = true)
        : n_(n), words_((n + 63) / 64, plus ? ~std::uint64_t{0} : 0) {
        trim();
    }

    static SpinConfig all_plus(std::size_t n) { return SpinConfig(n, true); }
    static SpinConfig all_minus(std::size_t n) { return SpinConfig(n, false); }

    /// Parses a string of '+' and '-' characters.
    static SpinConfig parse(std::string_view s) {
        if (s.empty()) throw invalid_input("empty spin string");
        SpinConfig c(s.size(), false);
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '+') c.set(i, true);
            else if (s[i] != '-') throw invalid_input("spin string may only contain '+' and '-': " + std::string(s));
        }
        return c;
    }

    /// Parses "0x..." hex where bit i of the integer is coordinate i.
    static SpinConfig parse_hex(std::string_view s, std::size_t n) {
        if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X'))
            throw invalid_input("hex spin form must start with 0x");
        SpinConfig c(n, false);
        std::size_t bit = 0;
        for (std::size_t p = s.size(); p-- > 2; bit += 4) {
            char ch = s[p];
            int v;
            if (ch >= '0' && ch <= '9') v = ch - '0';
            else if (ch >= 'a' && ch <= 'f') v = ch - 'a' + 10;
            else if (ch >= 'A' && ch <= 'F') v = ch - 'A' + 10;
            else throw invalid_input("bad hex digit in spin form");
            for (int b = 0; b < 4; ++b) {
                if (!((v >> b) & 1)) continue;
                if (bit + b >= n) throw invalid_input("hex spin form has bits beyond N");
                c.set(bit + b, true);
            }
        }
        return c;
    }

    /// Accepts either textual form; hex requires n.
    static SpinConfig parse_any(std::string_view s, std::size_t n = 0) {
        if (s.size() > 1 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
            if (n == 0) throw invalid_input("hex spin form needs explicit N");
            return parse_hex(s, n);
        }
        SpinConfig c = parse(s);
        if (n != 0 && c.size() != n) throw invalid_input("spin string length differs from N");
        return c;
    }

    static SpinConfig from_index(std::uint64_t idx, std::size_t n) {
        if (n > 64) throw invalid_input("index form limited to N <= 64");
        SpinConfig c(n, false);
        if (n) c.words_[0] = idx;
        c.trim();
        return c;
    }

    std::uint64_t to_index() const {
        if (n_ > 64) throw invalid_input("index form limited to N <= 64");
        return n_ ? words_[0] : 0;
    }

    std::size_t size() const { return n_; }

    bool plus(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    int spin(std::size_t i) const { return plus(i) ? 1 : -1; }

    void set(std::size_t i, bool plus) {
        std::uint64_t m = std::uint64_t{1} << (i & 63);
        if (plus) words_[i >> 6] |= m;
        else words_[i >> 6] &= ~m;
    }

    void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    SpinConfig flipped(std::size_t i) const {
        SpinConfig c = *this;
        c.flip(i);
        return c;
    }

    SpinConfig negated() const {
        SpinConfig c = *this;
        for (auto& w : c.words_) w = ~w;
        c.trim();
        return c;
    }

    /// Coordinatewise product with another configuration.
    SpinConfig times(const SpinConfig& o) const {
        check_same(o);
        SpinConfig c = *this;
        for (std::size_t w = 0; w < words_.size(); ++w) c.words_[w] = ~(words_[w] ^ o.words_[w]);
        c.trim();
        return c;
    }

    std::size_t count_plus() const {
        std::size_t k = 0;
        for (auto w : words_) k += static_cast<std::size_t>(std::popcount(w));
        return k;
    }

    std::string to_string() const {
        std::string s(n_, '-');
        for (std::size_t i = 0; i < n_; ++i)
            if (plus(i)) s[i] = '+';
        return s;
    }

    const std::vector<std::uint64_t>& words() const { return words_; }

    friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

    friend std::strong_ordering operator<=>(const SpinConfig& a, const SpinConfig& b) {
        if (auto c = a.n_ <=> b.n_; c != 0) return c;
        for (std::size_t w = a.words_.size(); w-- > 0;)
            if (auto c = a.words_[w] <=> b.words_[w]; c != 0) return c;
        return std::strong_ordering::equal;
    }

    void check_same(const SpinConfig& o) const {
        if (o.n_ != n_) throw invalid_input("spin configurations have different N");
    }

private:
    void trim() {
        if (n_ & 63) words_.back() &= (std::uint64_t{1} << (n_ & 63)) - 1;
    }

    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Number of coordinates where the two configurations differ.
inline std::size_t hamming(const SpinConfig& a, const SpinConfig& b) {
    a.check_same(b);
    std::size_t d = 0;
    for (std::size_t w = 0; w < a.words().size(); ++w)
        d += static_cast<std::size_t>(std::popcount(a.words()[w] ^ b.words()[w]));
    return d;
}

/// Hamming distance restricted to the 0-based coordinates in L.
inline std::size_t hamming_in(const std::vector<std::size_t>& L, const SpinConfig& a, const SpinConfig& b) {
    a.check_same(b);
    std::size_t d = 0;
    for (auto i : L) {
        if (i >= a.size()) throw invalid_input("coordinate out of range");
        d += a.plus(i) != b.plus(i);
    }
    return d;
}

/// A finite set of configurations of common length, kept sorted and unique.
class SpinSet {
public:
    SpinSet() = default;

    explicit SpinSet(std::vector<SpinConfig> v) : items_(std::move(v)) {
        normalize();
    }

    static SpinSet parse_lines(std::string_view text, std::size_t n = 0) {
        std::vector<SpinConfig> v;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            std::string_view line = text.substr(pos, end - pos);
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
            while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
            if (!line.empty() && line.front() != '#') v.push_back(SpinConfig::parse_any(line, n));
            pos = end + 1;
        }
        return SpinSet(std::move(v));
    }

    void insert(const SpinConfig& s) {
        items_.push_back(s);
        normalize();
    }

    bool contains(const SpinConfig& s) const { return std::binary_search(items_.begin(), items_.end(), s); }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    std::size_t dimension() const { return items_.empty() ? 0 : items_.front().size(); }
    const SpinConfig& operator[](std::size_t i) const { return items_[i]; }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }
    const std::vector<SpinConfig>& items() const { return items_; }

    SpinSet without(const SpinConfig& s) const {
        std::vector<SpinConfig> v;
        for (const auto& x : items_)
            if (!(x == s)) v.push_back(x);
        return SpinSet(std::move(v));
    }

    SpinSet with(const SpinConfig& s) const {
        SpinSet r = *this;
        r.insert(s);
        return r;
    }

    std::string to_lines() const {
        std::string out;
        for (const auto& s : items_) out += s.to_string() + "\n";
        return out;
    }

private:
    void normalize() {
        for (const auto& s : items_)
            if (s.size() != items_.front().size()) throw invalid_input("spin set mixes dimensions");
        std::sort(items_.begin(), items_.end());
        items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
    }

    std::vector<SpinConfig> items_;
};

/// Smallest pairwise Hamming distance, or N+1 for sets with fewer than two points.
inline std::size_t min_pairwise_distance(const SpinSet& a) {
    std::size_t best = a.dimension() + 1;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) best = std::min(best, hamming(a[i], a[j]));
    return best;
}

/**
 * \brief Separation hypothesis: every pair of points is farther apart than threshold.
 */
inline bool hypothesis_H(const SpinSet& a, std::size_t threshold = 3) {
    return min_pairwise_distance(a) > threshold;
}

} // namespace hcp
