#pragma once

#include <cstdint>
#include <string>

#include "dromo/mdp.hpp"

namespace dromo {

// Actions: 0 = left, 1 = right. The intended move happens with probability
// 0.9, otherwise the agent stays. Reward 1 for any action taken in the last
// state; starts at state 0.
TabularMdp make_chain(int n, double gamma);

// n x n grid, actions up/right/down/left. With probability 0.9 the intended
// move, otherwise a uniformly random direction; walls block. Reward 1 in the
// bottom-right cell; starts top-left.
TabularMdp make_gridworld(int n, double gamma);

// Dirichlet(1) transition rows, rewards uniform in [-1, 1], uniform start.
TabularMdp make_random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed);

// "chain{N}", "gridworld{N}" or "random{S}x{A}". Throws std::invalid_argument
// for anything else.
TabularMdp make_builtin(const std::string& name, double gamma, std::uint64_t seed);
bool is_builtin_name(const std::string& name);

}  // namespace dromo
