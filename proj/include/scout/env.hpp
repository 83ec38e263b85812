#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "scout/tensor.hpp"

namespace scout {

enum class EnvKind { OpenLabyrinth, FourRoom, KeyMaze };

// Deterministic gridworld MDP loaded from a textual layout:
//   '#' wall, '.' free, 'S' start, 'K' key, 'D' door, 'R' reward
// Labyrinth layouts (no key/door/reward) emit two stacked binary planes
// [walls, agent]; maze layouts emit five [walls, agent, key, door, reward].
// Planes are flattened row-major into a single observation vector, which is
// injective over reachable states.
//
// Actions: 0 up, 1 down, 2 left, 3 right. Moves into walls, borders, or a
// closed door leave the position unchanged. Entering the key cell sets
// has_key (reward 1); entering the reward cell ends the episode (reward 10).
// Non-terminal steps carry the configured discount, terminal steps 0.
class Env {
  public:
    struct StepResult {
        Tensor obs;
        double r_extr = 0.0;
        double gamma = 0.0;
        bool terminal = false;
    };

    struct StateInfo {
        int row = 0, col = 0;
        bool has_key = false;
    };

    static Env load(EnvKind kind, double gamma = 0.8);
    static Env from_layout_text(const std::string& text, double gamma = 0.8);
    static Env from_layout_file(const std::string& path, double gamma = 0.8);

    Tensor reset();
    StepResult step(int action);

    Tensor obs() const;
    int obs_dim() const;
    int num_actions() const { return 4; }
    bool is_maze() const { return maze_mode_; }
    int width() const { return width_; }
    int height() const { return height_; }
    double gamma() const { return gamma_; }
    int max_episode_steps() const { return max_episode_steps_; }
    void set_max_episode_steps(int n) { max_episode_steps_ = n; }

    bool terminated() const { return terminated_; }
    int steps_taken() const { return step_count_; }
    bool has_key() const { return has_key_; }
    int agent_row() const { return agent_row_; }
    int agent_col() const { return agent_col_; }

    // Reachable-state table (flood fill from the start over true dynamics),
    // ordered by (has_key, row, col) so ids are layout-stable.
    int num_states() const { return static_cast<int>(states_.size()); }
    int state_id() const;
    int peek_state_id(int action) const;  // successor id under true dynamics
    StateInfo state_info(int id) const;

    // place the agent in an arbitrary reachable configuration (tests, tools)
    void teleport(int row, int col, bool has_key);

  private:
    void parse(const std::string& text);
    void build_state_table();
    // next position and key/terminal effects for (row, col, key) under action
    struct Move {
        int row, col;
        bool has_key;
        double reward;
        bool terminal;
    };
    Move apply(int row, int col, bool key, int action) const;
    bool passable(int row, int col, bool key) const;

    int width_ = 0, height_ = 0;
    std::vector<char> grid_;  // '#' or '.'; special cells tracked separately
    int start_row_ = -1, start_col_ = -1;
    int key_row_ = -1, key_col_ = -1;
    int reward_row_ = -1, reward_col_ = -1;
    std::vector<std::pair<int, int>> doors_;
    bool maze_mode_ = false;
    double gamma_ = 0.8;
    int max_episode_steps_ = 4000;

    int agent_row_ = 0, agent_col_ = 0;
    bool has_key_ = false;
    bool terminated_ = false;
    int step_count_ = 0;

    std::vector<StateInfo> states_;
    std::unordered_map<int, int> state_index_;  // packed (key,row,col) -> id
    int pack(int row, int col, bool key) const {
        return (key ? 1 : 0) * width_ * height_ + row * width_ + col;
    }
};

EnvKind env_kind_from_name(const std::string& name);
std::string env_kind_name(EnvKind kind);

}  // namespace scout
