// Upper bounds on the joint spectral radius of a 3x3 pair as the De Bruijn
// order grows, next to the best lower bound from products of length <= 12.
//
//   guglielmi_bounds [max_order]

#include <cstdio>
#include <cstdlib>

#include "tropkraus/kraus.hpp"
#include "tropkraus/oracles.hpp"

using namespace tropkraus;

int main(int argc, char** argv) {
  const std::size_t max_order = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 8;

  Matrix a1(3, 3), a2(3, 3);
  a1 << -1, 1, -1, -1, -1, 1, 0, 1, 1;
  a2 << -1, 1, -1, -1, -1, 0, 1, 1, 1;
  const MatrixFamily family({a1, a2});

  const ProductBound b = jsr_bruteforce(family, 12);
  std::printf("products up to length 12: %.5f <= rho <= %.5f\n\n", b.lower, b.upper);
  std::printf("order  nodes   rho_cert  iterations\n");
  for (std::size_t d = 2; d <= max_order; d += 2) {
    const Automaton aut = de_bruijn(2, d);
    const EigenResult r = km_iterate(family, aut);
    std::printf("%5zu  %5zu  %9.5f  %10zu%s\n", d, aut.node_count(), r.rho_cert, r.iterations,
                r.converged ? "" : " (not converged)");
  }
}
