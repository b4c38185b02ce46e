#pragma once

#include "repvar/matrix.hpp"

#include <cstddef>

namespace repvar {

/// Square array of +1/-1 entries; no orthogonality guarantee.
using SignMatrix = Matrix<int>;

/// True iff M is square with entries in {-1, +1} and M^T M = R I exactly.
bool verify(const SignMatrix& M);

/**
 * @brief Hadamard matrix with a verified H^T H = R I.
 *
 * Instances come from construct_hadamard() or from_signs(); both check
 * orthogonality in integer arithmetic. Constructed matrices are normalized
 * so that column 0 is all ones, which makes every other column sum to zero.
 */
class HadamardMatrix {
public:
    /// Throws UnconstructibleOrder if @p signs fails verify().
    static HadamardMatrix from_signs(SignMatrix signs);

    std::size_t order() const noexcept { return signs_.rows(); }
    int operator()(std::size_t r, std::size_t c) const { return signs_(r, c); }
    const SignMatrix& signs() const noexcept { return signs_; }

private:
    explicit HadamardMatrix(SignMatrix signs) : signs_(std::move(signs)) {}
    SignMatrix signs_;
};

/// True if construct_hadamard(order) succeeds.
bool is_constructible(std::size_t order);

/**
 * Builds a Hadamard matrix of the given order by Sylvester doubling,
 * Paley I (q + 1, q prime, q = 3 mod 4), Paley II (2(q + 1), q prime,
 * q = 1 mod 4), or doubling of any of those.
 */
HadamardMatrix construct_hadamard(std::size_t order);

/// Smallest constructible R >= num_strata. Searches up to 2 * num_strata + 4.
std::size_t smallest_valid_order(std::size_t num_strata);

/// Smallest constructible R with at least num_strata zero-sum columns (R > num_strata).
std::size_t smallest_balanced_order(std::size_t num_strata);

/**
 * Picks the first @p num_strata columns with zero column sum, in column order.
 * Returns an R x num_strata sign array whose columns are pairwise orthogonal.
 * Throws InsufficientBalancedColumns when fewer are available.
 */
SignMatrix balanced_columns(const HadamardMatrix& M, std::size_t num_strata);

} // namespace repvar
