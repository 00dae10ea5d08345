#pragma once

#include <random>

#include "nessqfi/model.hpp"

namespace testing_support {

using nessqfi::Complex;
using nessqfi::DenseOperator;

inline DenseOperator random_matrix(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> g;
    DenseOperator a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = Complex{g(rng), g(rng)};
    return a;
}

// Full-rank state: Wishart draw plus a small multiple of the identity.
inline DenseOperator random_state(std::mt19937_64& rng, int dim) {
    const DenseOperator a = random_matrix(rng, dim);
    DenseOperator rho = a * a.adjoint() + 0.05 * DenseOperator::Identity(dim, dim);
    return rho / rho.trace().real();
}

// Traceless hermitian direction.
inline DenseOperator random_tangent(std::mt19937_64& rng, int dim) {
    const DenseOperator a = random_matrix(rng, dim);
    DenseOperator h = 0.5 * (a + a.adjoint());
    h -= (h.trace() / double(dim)) * DenseOperator::Identity(dim, dim);
    return h;
}

} // namespace testing_support
