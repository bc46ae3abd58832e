#pragma once

// Serial, definition-literal versions of the parallel kernels. They evaluate
// every site independently from the defining sums (2^N corner sums, explicit
// box sums over j, one matrix exponential per term) and are kept as test
// oracles and as the baseline of the kernel benchmark.

#include "fieldcorr/algebra.hpp"
#include "fieldcorr/lattice.hpp"

namespace fieldcorr::reference {

/// sum_{i in {0,1}^N} (-1)^{|i|} X_{t-i}, summed in corner order.
Vector unit_increment(const FieldWindow& x, const MultiIndex& t);

FieldWindow increment_field(const FieldWindow& x);

FieldWindow lamperti(const FieldWindow& x, const ThetaTuple& theta);
FieldWindow lamperti_inv(const FieldWindow& y, const ThetaTuple& theta);

/// G_t = (-1)^{|-u|} sum_{j_u = 1}^{t_u} sum_{j_{-u} = t_{-u}+1}^{0} exp(-j*Theta) Delta_j Y.
FieldWindow m_forward(const FieldWindow& y, const ThetaTuple& theta);

/// Y_{e^t} = sum_{j = out.lo - depth}^{t} exp(j*Theta) Delta_j G on `out`.
FieldWindow m_inverse(const FieldWindow& g, const ThetaTuple& theta, const Window& out,
                      const std::vector<std::int64_t>& depth);

/// sum_{i != 0} (-1)^{1+|i|} exp(-i*Theta) X_{t-i}.
Vector ar1_drift(const FieldWindow& x, const MultiIndex& t, const ThetaTuple& theta);

}  // namespace fieldcorr::reference
