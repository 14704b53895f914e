#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "error.hpp"
#include "lumped.hpp"

namespace hcp {

/**
 * \brief Minimal interface of a reversible chain the solvers can work on.
 *
 * key() orders states so that neighbours are close; the banded solver uses it.
 */
template <class V>
concept ChainView = requires(const V& v, std::size_t i) {
    { v.state_count() } -> std::convertible_to<std::size_t>;
    { v.log_measure(i) } -> std::convertible_to<double>;
    { v.key(i) } -> std::convertible_to<std::size_t>;
    { v.name() } -> std::convertible_to<std::string>;
    v.for_each_neighbor(i, [](std::size_t, double) {});
};

/// The single-flip walk on {-1,+1}^N with states indexed by bit patterns.
class HypercubeView {
public:
    static constexpr std::size_t max_dimension = 30;

    explicit HypercubeView(std::size_t n) : n_(n) {
        if (n == 0 || n > max_dimension) throw too_large("hypercube exact solves support 1 <= N <= 30");
    }

    std::size_t N() const { return n_; }
    std::size_t state_count() const { return std::size_t{1} << n_; }
    double log_measure(std::size_t) const { return -static_cast<double>(n_) * std::numbers::ln2; }
    std::size_t key(std::size_t i) const { return i; }
    std::string name() const { return "hypercube"; }

    template <class F>
    void for_each_neighbor(std::size_t i, F&& f) const {
        const double r = 1.0 / static_cast<double>(n_);
        for (std::size_t k = 0; k < n_; ++k) f(i ^ (std::size_t{1} << k), r);
    }

    std::size_t index(const SpinConfig& s) const {
        if (s.size() != n_) throw invalid_input("configuration length differs from N");
        return static_cast<std::size_t>(s.to_index());
    }

    SpinConfig config(std::size_t i) const { return SpinConfig::from_index(i, n_); }

private:
    std::size_t n_;
};

/// The lumped walk seen through the ChainView interface; the largest axis varies slowest in key().
class LumpedView {
public:
    explicit LumpedView(const LumpedChain& c) : c_(&c), key_stride_(c.d()) {
        std::vector<std::size_t> order(c.d());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c.size(a) < c.size(b); });
        std::size_t s = 1;
        for (auto k : order) {
            key_stride_[k] = s;
            s *= c.size(k) + 1;
        }
    }

    const LumpedChain& chain() const { return *c_; }
    std::size_t state_count() const { return c_->state_count(); }
    double log_measure(std::size_t i) const { return c_->log_Q(i); }
    std::string name() const { return "lumped"; }

    std::size_t key(std::size_t i) const {
        std::size_t k = 0;
        for (std::size_t a = 0; a < c_->d(); ++a) k += c_->coord(i, a) * key_stride_[a];
        return k;
    }

    template <class F>
    void for_each_neighbor(std::size_t i, F&& f) const {
        c_->for_each_neighbor(i, std::forward<F>(f));
    }

private:
    const LumpedChain* c_;
    std::vector<std::size_t> key_stride_;
};

static_assert(ChainView<HypercubeView>);
static_assert(ChainView<LumpedView>);

} // namespace hcp
