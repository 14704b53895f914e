#pragma once

#include <stdexcept>
#include <string>

namespace hcp {

/** \brief Malformed or inconsistent input (bad strings, size mismatches, invalid partitions). */
class invalid_input : public std::invalid_argument {
public:
    explicit invalid_input(const std::string& what) : std::invalid_argument(what) {}
};

/** \brief A requested computation exceeds a configured size limit. */
class too_large : public std::length_error {
public:
    explicit too_large(const std::string& what) : std::length_error(what) {}
};

/** \brief A linear solve failed or did not reach the residual contract. */
class solve_error : public std::runtime_error {
public:
    explicit solve_error(const std::string& what) : std::runtime_error(what) {}
};

/** \brief A Laplace transform was requested above its convergence threshold. */
class out_of_domain : public std::domain_error {
public:
    explicit out_of_domain(const std::string& what) : std::domain_error(what) {}
};

} // namespace hcp
