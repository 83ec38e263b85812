#include "scout/env.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "scout/common.hpp"

namespace scout {

EnvKind env_kind_from_name(const std::string& name) {
    if (name == "open_labyrinth") return EnvKind::OpenLabyrinth;
    if (name == "four_room") return EnvKind::FourRoom;
    if (name == "key_maze") return EnvKind::KeyMaze;
    fail("unknown environment: " + name);
}

std::string env_kind_name(EnvKind kind) {
    switch (kind) {
        case EnvKind::OpenLabyrinth: return "open_labyrinth";
        case EnvKind::FourRoom: return "four_room";
        case EnvKind::KeyMaze: return "key_maze";
    }
    fail("bad env kind");
}

Env Env::load(EnvKind kind, double gamma) {
    return from_layout_file(std::string(SCOUT_DATA_DIR) + "/" + env_kind_name(kind) + ".txt",
                            gamma);
}

Env Env::from_layout_file(const std::string& path, double gamma) {
    std::ifstream in(path);
    check(in.good(), "cannot open layout file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_layout_text(ss.str(), gamma);
}

Env Env::from_layout_text(const std::string& text, double gamma) {
    Env e;
    e.gamma_ = gamma;
    e.parse(text);
    e.build_state_table();
    e.reset();
    return e;
}

void Env::parse(const std::string& text) {
    std::vector<std::string> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) rows.push_back(line);
    }
    check(!rows.empty(), "layout: empty file");
    height_ = static_cast<int>(rows.size());
    width_ = static_cast<int>(rows[0].size());
    grid_.assign(static_cast<size_t>(width_) * height_, '#');

    for (int r = 0; r < height_; ++r) {
        check(static_cast<int>(rows[r].size()) == width_,
              "layout: ragged row " + std::to_string(r));
        for (int c = 0; c < width_; ++c) {
            char ch = rows[r][static_cast<size_t>(c)];
            bool border = r == 0 || c == 0 || r == height_ - 1 || c == width_ - 1;
            switch (ch) {
                case '#':
                    break;
                case '.':
                    grid_[static_cast<size_t>(r) * width_ + c] = '.';
                    break;
                case 'S':
                    check(start_row_ < 0, "layout: multiple start cells");
                    start_row_ = r;
                    start_col_ = c;
                    grid_[static_cast<size_t>(r) * width_ + c] = '.';
                    break;
                case 'K':
                    check(key_row_ < 0, "layout: multiple key cells");
                    key_row_ = r;
                    key_col_ = c;
                    grid_[static_cast<size_t>(r) * width_ + c] = '.';
                    break;
                case 'D':
                    doors_.emplace_back(r, c);
                    grid_[static_cast<size_t>(r) * width_ + c] = '.';
                    break;
                case 'R':
                    check(reward_row_ < 0, "layout: multiple reward cells");
                    reward_row_ = r;
                    reward_col_ = c;
                    grid_[static_cast<size_t>(r) * width_ + c] = '.';
                    break;
                default:
                    fail("layout: invalid character '" + std::string(1, ch) + "' at row " +
                         std::to_string(r) + " col " + std::to_string(c));
            }
            if (border)
                check(ch == '#', "layout: border must be wall at row " + std::to_string(r) +
                                     " col " + std::to_string(c));
        }
    }
    check(start_row_ >= 0, "layout: missing start cell");
    maze_mode_ = key_row_ >= 0 || reward_row_ >= 0 || !doors_.empty();
    if (maze_mode_) {
        check(key_row_ >= 0, "layout: maze needs a key cell");
        check(reward_row_ >= 0, "layout: maze needs a reward cell");
    }
}

bool Env::passable(int row, int col, bool key) const {
    if (row < 0 || col < 0 || row >= height_ || col >= width_) return false;
    if (grid_[static_cast<size_t>(row) * width_ + col] == '#') return false;
    if (!key)
        for (auto [dr, dc] : doors_)
            if (dr == row && dc == col) return false;
    return true;
}

Env::Move Env::apply(int row, int col, bool key, int action) const {
    check(action >= 0 && action < 4, "env: unknown action id " + std::to_string(action));
    static const int drow[4] = {-1, 1, 0, 0};
    static const int dcol[4] = {0, 0, -1, 1};
    int nr = row + drow[action];
    int nc = col + dcol[action];
    if (!passable(nr, nc, key)) {
        nr = row;
        nc = col;
    }
    Move m{nr, nc, key, 0.0, false};
    if (maze_mode_) {
        if (!key && nr == key_row_ && nc == key_col_) {
            m.has_key = true;
            m.reward = 1.0;
        }
        if (nr == reward_row_ && nc == reward_col_) {
            m.reward = 10.0;
            m.terminal = true;
        }
    }
    return m;
}

void Env::build_state_table() {
    // flood fill over true dynamics; terminal states are recorded but not expanded
    std::deque<StateInfo> frontier;
    std::unordered_map<int, bool> seen;  // packed -> terminal
    auto push = [&](int row, int col, bool key, bool terminal) {
        int p = pack(row, col, key);
        if (seen.count(p)) return;
        seen[p] = terminal;
        if (!terminal) frontier.push_back({row, col, key});
    };
    push(start_row_, start_col_, false, false);
    while (!frontier.empty()) {
        StateInfo s = frontier.front();
        frontier.pop_front();
        for (int a = 0; a < 4; ++a) {
            Move m = apply(s.row, s.col, s.has_key, a);
            push(m.row, m.col, m.has_key, m.terminal);
        }
    }
    states_.clear();
    for (auto& [p, terminal] : seen) {
        (void)terminal;
        bool key = p >= width_ * height_;
        int rest = p % (width_ * height_);
        states_.push_back({rest / width_, rest % width_, key});
    }
    std::sort(states_.begin(), states_.end(), [](const StateInfo& a, const StateInfo& b) {
        if (a.has_key != b.has_key) return !a.has_key;
        if (a.row != b.row) return a.row < b.row;
        return a.col < b.col;
    });
    state_index_.clear();
    for (int i = 0; i < static_cast<int>(states_.size()); ++i)
        state_index_[pack(states_[i].row, states_[i].col, states_[i].has_key)] = i;
}

Tensor Env::reset() {
    agent_row_ = start_row_;
    agent_col_ = start_col_;
    has_key_ = false;
    terminated_ = false;
    step_count_ = 0;
    return obs();
}

Env::StepResult Env::step(int action) {
    check(!terminated_, "env: step after termination");
    Move m = apply(agent_row_, agent_col_, has_key_, action);
    agent_row_ = m.row;
    agent_col_ = m.col;
    has_key_ = m.has_key;
    ++step_count_;
    check(passable(agent_row_, agent_col_, true), "env: agent left the free space");

    StepResult out;
    out.r_extr = m.reward;
    terminated_ = m.terminal || (maze_mode_ && step_count_ >= max_episode_steps_);
    out.terminal = terminated_;
    out.gamma = terminated_ ? 0.0 : gamma_;
    out.obs = obs();
    return out;
}

Tensor Env::obs() const {
    int plane = width_ * height_;
    Tensor o(1, obs_dim());
    for (int r = 0; r < height_; ++r)
        for (int c = 0; c < width_; ++c)
            if (grid_[static_cast<size_t>(r) * width_ + c] == '#') o.data[r * width_ + c] = 1.0;
    o.data[plane + agent_row_ * width_ + agent_col_] = 1.0;
    if (maze_mode_) {
        if (!has_key_) o.data[2 * plane + key_row_ * width_ + key_col_] = 1.0;
        if (!has_key_)
            for (auto [dr, dc] : doors_) o.data[3 * plane + dr * width_ + dc] = 1.0;
        o.data[4 * plane + reward_row_ * width_ + reward_col_] = 1.0;
    }
    return o;
}

int Env::obs_dim() const { return (maze_mode_ ? 5 : 2) * width_ * height_; }

int Env::state_id() const {
    auto it = state_index_.find(pack(agent_row_, agent_col_, has_key_));
    check(it != state_index_.end(), "env: current state missing from table");
    return it->second;
}

int Env::peek_state_id(int action) const {
    check(!terminated_, "env: peek after termination");
    Move m = apply(agent_row_, agent_col_, has_key_, action);
    auto it = state_index_.find(pack(m.row, m.col, m.has_key));
    check(it != state_index_.end(), "env: successor missing from table");
    return it->second;
}

Env::StateInfo Env::state_info(int id) const {
    check(id >= 0 && id < num_states(), "env: state id out of range");
    return states_[static_cast<size_t>(id)];
}

void Env::teleport(int row, int col, bool has_key) {
    check(state_index_.count(pack(row, col, has_key)) > 0, "env: teleport to unreachable state");
    agent_row_ = row;
    agent_col_ = col;
    has_key_ = has_key;
    terminated_ = false;
}

}  // namespace scout
