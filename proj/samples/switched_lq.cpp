// Value function of a two-mode switched LQ problem read from JSON, with the
// Hamiltonian residual before and after the fixed-point iteration.
//
//   switched_lq problem.json [order] [tau]

#include <cstdio>
#include <cstdlib>
#include <exception>

#include "tropkraus/io.hpp"
#include "tropkraus/riccati.hpp"

using namespace tropkraus;

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s problem.json [order] [tau]\n", argv[0]);
    return 1;
  }
  try {
    const LQProblem prob = io::lq_from_json(io::read_json_file(argv[1]));
    const std::size_t order = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 2;
    HjbOptions opt;
    if (argc > 3) opt.tau = std::strtod(argv[3], nullptr);

    const Automaton aut = de_bruijn(prob.mode_count(), order);
    const ValueApprox start{KrausState::constant(prob.dim(), aut.node_count(), opt.init_scale), opt.tau, aut};
    const HjbResult res = hjb_fixed_point(prob, aut, opt);

    std::printf("nodes %zu, tau %g\n", aut.node_count(), opt.tau);
    std::printf("back-substitution error  %.4g -> %.4g\n", backsub_error(start, prob), backsub_error(res.value, prob));
    std::printf("iterations %zu%s, last step %.3g\n", res.iterations, res.converged ? "" : " (not converged)",
                res.residual);
    std::printf("sub-invariance violation %.3g\n", subinvariance_check(res.value, prob, opt.tau));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
