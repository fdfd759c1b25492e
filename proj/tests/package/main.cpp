#include <cmath>
#include <cstdio>

#include "bwgame/solver.hpp"

int main() {
  using namespace bwgame;
  const GameInstance g(2.0, {PeerProfile(PeerId("a"), 400, 2), PeerProfile(PeerId("b"), 300, 1.5)});
  const Equilibrium eq = solve(g);
  std::printf("price %.6g\n", eq.price);
  return std::abs(eq.total_bandwidth() - 2.0) < 1e-9 ? 0 : 1;
}
