#include "repvar/hadamard.hpp"

#include "repvar/error.hpp"

#include <optional>
#include <string>
#include <vector>

namespace repvar {

namespace {

bool is_prime(std::size_t n) {
    if (n < 2) return false;
    for (std::size_t k = 2; k * k <= n; ++k) {
        if (n % k == 0) return false;
    }
    return true;
}

bool paley1_applies(std::size_t n) { return n >= 4 && is_prime(n - 1) && (n - 1) % 4 == 3; }

bool paley2_applies(std::size_t n) {
    if (n < 4 || n % 2 != 0) return false;
    const std::size_t q = n / 2 - 1;
    return is_prime(q) && q % 4 == 1;
}

// Quadratic character of a modulo the prime q: 0, +1 or -1.
std::vector<int> quadratic_character(std::size_t q) {
    std::vector<int> chi(q, -1);
    chi[0] = 0;
    for (std::size_t x = 1; x < q; ++x) chi[(x * x) % q] = 1;
    return chi;
}

// Jacobsthal matrix Q_ij = chi(j - i).
SignMatrix jacobsthal(std::size_t q) {
    const auto chi = quadratic_character(q);
    SignMatrix Q(q, q);
    for (std::size_t i = 0; i < q; ++i) {
        for (std::size_t j = 0; j < q; ++j) Q(i, j) = chi[(j + q - i) % q];
    }
    return Q;
}

SignMatrix sylvester_double(const SignMatrix& A) {
    const std::size_t n = A.rows();
    SignMatrix M(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            M(i, j) = A(i, j);
            M(i, j + n) = A(i, j);
            M(i + n, j) = A(i, j);
            M(i + n, j + n) = -A(i, j);
        }
    }
    return M;
}

// I + S with S = [[0, 1^T], [-1, Q]], q = 3 mod 4.
SignMatrix paley1(std::size_t q) {
    const auto Q = jacobsthal(q);
    SignMatrix M(q + 1, q + 1);
    M(0, 0) = 1;
    for (std::size_t j = 1; j <= q; ++j) {
        M(0, j) = 1;
        M(j, 0) = -1;
    }
    for (std::size_t i = 0; i < q; ++i) {
        for (std::size_t j = 0; j < q; ++j) M(i + 1, j + 1) = Q(i, j) + (i == j ? 1 : 0);
    }
    return M;
}

// Symmetric conference matrix C = [[0, 1^T], [1, Q]], q = 1 mod 4; each zero
// becomes [[1, -1], [-1, -1]] and each +/-1 becomes +/-[[1, 1], [1, -1]].
SignMatrix paley2(std::size_t q) {
    const auto Q = jacobsthal(q);
    const std::size_t m = q + 1;
    auto conference = [&](std::size_t i, std::size_t j) -> int {
        if (i == 0 && j == 0) return 0;
        if (i == 0 || j == 0) return 1;
        return Q(i - 1, j - 1);
    };
    SignMatrix M(2 * m, 2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const int c = conference(i, j);
            const int block[2][2] = {{c == 0 ? 1 : c, c == 0 ? -1 : c}, {c == 0 ? -1 : c, c == 0 ? -1 : -c}};
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) M(2 * i + a, 2 * j + b) = block[a][b];
            }
        }
    }
    return M;
}

std::optional<SignMatrix> build(std::size_t n) {
    if (n == 0) return std::nullopt;
    if (n == 1) return SignMatrix(1, 1, 1);
    if (n == 2) return sylvester_double(SignMatrix(1, 1, 1));
    if (n % 4 != 0) return std::nullopt;
    if (auto half = build(n / 2)) return sylvester_double(*half);
    if (paley1_applies(n)) return paley1(n - 1);
    if (paley2_applies(n)) return paley2(n / 2 - 1);
    return std::nullopt;
}

void normalize_first_column(SignMatrix& M) {
    for (std::size_t r = 0; r < M.rows(); ++r) {
        if (M(r, 0) < 0) {
            for (auto& v : M.row(r)) v = -v;
        }
    }
}

} // namespace

bool verify(const SignMatrix& M) {
    const std::size_t n = M.rows();
    if (n == 0 || M.cols() != n) return false;
    for (int v : M.data()) {
        if (v != 1 && v != -1) return false;
    }
    const long long order = static_cast<long long>(n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            long long dot = 0;
            for (std::size_t r = 0; r < n; ++r) dot += M(r, a) * M(r, b);
            if (dot != (a == b ? order : 0)) return false;
        }
    }
    return true;
}

HadamardMatrix HadamardMatrix::from_signs(SignMatrix signs) {
    if (!verify(signs)) {
        throw Error(ErrorCode::UnconstructibleOrder, "sign matrix fails H^T H = R I");
    }
    return HadamardMatrix(std::move(signs));
}

bool is_constructible(std::size_t order) {
    if (order == 1 || order == 2) return true;
    if (order == 0 || order % 4 != 0) return false;
    return is_constructible(order / 2) || paley1_applies(order) || paley2_applies(order);
}

HadamardMatrix construct_hadamard(std::size_t order) {
    auto signs = build(order);
    if (!signs) {
        throw Error(ErrorCode::UnconstructibleOrder,
                    "no Sylvester/Paley construction for order " + std::to_string(order));
    }
    normalize_first_column(*signs);
    return HadamardMatrix::from_signs(std::move(*signs));
}

std::size_t smallest_valid_order(std::size_t num_strata) {
    if (num_strata == 0) {
        throw Error(ErrorCode::UnconstructibleOrder, "number of strata must be at least 1");
    }
    const std::size_t bound = 2 * num_strata + 4;
    for (std::size_t r = num_strata; r <= bound; ++r) {
        if (is_constructible(r)) return r;
    }
    throw Error(ErrorCode::UnconstructibleOrder,
                "no constructible order in [" + std::to_string(num_strata) + ", " + std::to_string(bound) + "]");
}

std::size_t smallest_balanced_order(std::size_t num_strata) { return smallest_valid_order(num_strata + 1); }

SignMatrix balanced_columns(const HadamardMatrix& M, std::size_t num_strata) {
    const std::size_t R = M.order();
    std::vector<std::size_t> picked;
    for (std::size_t c = 0; c < R && picked.size() < num_strata; ++c) {
        long long sum = 0;
        for (std::size_t r = 0; r < R; ++r) sum += M(r, c);
        if (sum == 0) picked.push_back(c);
    }
    if (picked.size() < num_strata) {
        throw Error(ErrorCode::InsufficientBalancedColumns,
                    "order " + std::to_string(R) + " has " + std::to_string(picked.size()) +
                        " zero-sum columns, need " + std::to_string(num_strata));
    }
    SignMatrix out(R, num_strata);
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t h = 0; h < num_strata; ++h) out(r, h) = M(r, picked[h]);
    }
    return out;
}

} // namespace repvar
