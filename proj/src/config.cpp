#include "qil/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qil/envs.hpp"
#include "qil/errors.hpp"
#include "qil/rng.hpp"

namespace qil::config {

// ------------------------------------------------------------------ values

TomlValue TomlValue::of(const std::string& v) {
    TomlValue t;
    t.kind = Kind::String;
    t.s = v;
    return t;
}
TomlValue TomlValue::of(bool v) {
    TomlValue t;
    t.kind = Kind::Bool;
    t.b = v;
    return t;
}
TomlValue TomlValue::of(long long v) {
    TomlValue t;
    t.kind = Kind::Integer;
    t.i = v;
    return t;
}
TomlValue TomlValue::of(double v) {
    TomlValue t;
    t.kind = Kind::Float;
    t.d = v;
    return t;
}
TomlValue TomlValue::of(const std::vector<double>& v) {
    TomlValue t;
    t.kind = Kind::NumberArray;
    t.nums = v;
    return t;
}
TomlValue TomlValue::of(const std::vector<std::string>& v) {
    TomlValue t;
    t.kind = Kind::StringArray;
    t.strs = v;
    return t;
}

double TomlValue::as_number() const {
    if (kind == Kind::Integer) return static_cast<double>(i);
    if (kind == Kind::Float) return d;
    throw ConfigError("config value is not a number");
}

bool TomlValue::operator==(const TomlValue& other) const {
    if (kind != other.kind) return false;
    switch (kind) {
        case Kind::String: return s == other.s;
        case Kind::Bool: return b == other.b;
        case Kind::Integer: return i == other.i;
        case Kind::Float:
            return (std::isnan(d) && std::isnan(other.d)) || d == other.d;
        case Kind::NumberArray: return nums == other.nums;
        case Kind::StringArray: return strs == other.strs;
    }
    return false;
}

const TomlValue* TomlTable::find(const std::string& key) const {
    for (const auto& [k, v] : items)
        if (k == key) return &v;
    return nullptr;
}

void TomlTable::set(const std::string& key, TomlValue value) {
    for (auto& [k, v] : items)
        if (k == key) {
            v = std::move(value);
            return;
        }
    items.emplace_back(key, std::move(value));
}

// ------------------------------------------------------------------ parser

namespace {

[[noreturn]] void parse_fail(int line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Strip a trailing # comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

std::string parse_quoted(const std::string& raw, int line) {
    if (raw.size() < 2 || raw.back() != '"') parse_fail(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
        char c = raw[i];
        if (c == '\\') {
            if (i + 2 >= raw.size()) parse_fail(line, "dangling escape");
            char n = raw[++i];
            if (n == 'n') out += '\n';
            else if (n == 't') out += '\t';
            else if (n == '"') out += '"';
            else if (n == '\\') out += '\\';
            else parse_fail(line, std::string("unknown escape \\") + n);
        } else if (c == '"') {
            parse_fail(line, "unescaped quote inside string");
        } else {
            out += c;
        }
    }
    return out;
}

bool is_integer_literal(const std::string& s) {
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

double parse_float_literal(const std::string& s, int line) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "-nan") return -std::numeric_limits<double>::quiet_NaN();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        parse_fail(line, "bad number \"" + s + "\"");
    }
    if (pos != s.size()) parse_fail(line, "trailing characters after number \"" + s + "\"");
    return v;
}

// Split a bracketed array body on top-level commas, respecting quotes.
std::vector<std::string> split_array(const std::string& body, int line) {
    std::vector<std::string> parts;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c == '"' && (i == 0 || body[i - 1] != '\\')) quoted = !quoted;
        if (c == ',' && !quoted) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    const std::string last = trim(cur);
    if (!last.empty()) parts.push_back(last);
    if (quoted) parse_fail(line, "unterminated string in array");
    for (const std::string& p : parts)
        if (p.empty()) parse_fail(line, "empty array element");
    return parts;
}

TomlValue parse_value(const std::string& raw, int line) {
    if (raw.empty()) parse_fail(line, "missing value");
    if (raw[0] == '"') return TomlValue::of(parse_quoted(raw, line));
    if (raw == "true") return TomlValue::of(true);
    if (raw == "false") return TomlValue::of(false);
    if (raw[0] == '[') {
        if (raw.back() != ']') parse_fail(line, "unterminated array");
        const std::vector<std::string> parts = split_array(raw.substr(1, raw.size() - 2), line);
        if (!parts.empty() && parts[0][0] == '"') {
            std::vector<std::string> strs;
            for (const std::string& p : parts) {
                if (p[0] != '"') parse_fail(line, "mixed string/number array");
                strs.push_back(parse_quoted(p, line));
            }
            return TomlValue::of(strs);
        }
        std::vector<double> nums;
        for (const std::string& p : parts) {
            if (p[0] == '"') parse_fail(line, "mixed string/number array");
            nums.push_back(is_integer_literal(p) ? static_cast<double>(std::stoll(p))
                                                 : parse_float_literal(p, line));
        }
        return TomlValue::of(nums);
    }
    if (is_integer_literal(raw)) {
        try {
            return TomlValue::of(static_cast<long long>(std::stoll(raw)));
        } catch (const std::exception&) {
            parse_fail(line, "integer out of range \"" + raw + "\"");
        }
    }
    return TomlValue::of(parse_float_literal(raw, line));
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
            return false;
    return true;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    // Integral values print without an exponent or fraction.
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f", v);
        return buf;
    }
    // Shortest representation that round-trips to the same double, so the
    // snapshot stays lossless but diffs read as "0.07" instead of 17 digits.
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\\\"";
        else if (c == '\\') out += "\\\\";
        else if (c == '\n') out += "\\n";
        else if (c == '\t') out += "\\t";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace

TomlTable parse_toml(const std::string& text) {
    TomlTable table;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string stripped = trim(strip_comment(raw));
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) parse_fail(line, "expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        if (!valid_key(key)) parse_fail(line, "bad key \"" + key + "\"");
        if (table.find(key)) parse_fail(line, "duplicate key \"" + key + "\"");
        table.items.emplace_back(key, parse_value(trim(stripped.substr(eq + 1)), line));
    }
    return table;
}

TomlTable parse_toml_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_toml(buf.str());
}

std::string serialize_toml(const TomlTable& table) {
    std::string out;
    for (const auto& [key, v] : table.items) {
        out += key;
        out += " = ";
        switch (v.kind) {
            case TomlValue::Kind::String: out += quote(v.s); break;
            case TomlValue::Kind::Bool: out += v.b ? "true" : "false"; break;
            case TomlValue::Kind::Integer: out += std::to_string(v.i); break;
            case TomlValue::Kind::Float: out += format_number(v.d); break;
            case TomlValue::Kind::NumberArray: {
                out += '[';
                for (std::size_t j = 0; j < v.nums.size(); ++j) {
                    if (j) out += ", ";
                    out += format_number(v.nums[j]);
                }
                out += ']';
                break;
            }
            case TomlValue::Kind::StringArray: {
                out += '[';
                for (std::size_t j = 0; j < v.strs.size(); ++j) {
                    if (j) out += ", ";
                    out += quote(v.strs[j]);
                }
                out += ']';
                break;
            }
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------- defaults

namespace {

constexpr double kPi = 3.14159265358979323846;

void apply_env_defaults(RunConfig& cfg, const std::string& env_id) {
    // Architecture and bounds per environment; Q-BC uses the tighter bounds
    // and local observables, the adversarial pipeline the wider ones.
    const bool bc = cfg.algorithm == "qbc";
    if (env_id == "CartPole-v1") {
        cfg.n_layers = 4;
        cfg.beta = 1.0;
        cfg.lr_policy = {0.07, 0.01, 0.07};
        cfg.reward_kind = "neg_log_d";
        cfg.observables = bc ? std::vector<std::string>{"Z0", "Z1"}
                             : std::vector<std::string>{"Z0Z1Z2Z3", "-Z0Z1Z2Z3"};
        cfg.state_bounds = bc ? std::vector<double>{1.0, 1.0, 1.0, 1.0}
                              : std::vector<double>{2.4, 2.5, 0.21, 2.5};
    } else if (env_id == "Acrobot-v1") {
        cfg.n_layers = 5;
        cfg.beta = 1.0;
        cfg.lr_policy = {0.1, 0.01, 0.1};
        cfg.reward_kind = "log_one_minus_d";
        cfg.observables = bc ? std::vector<std::string>{"Z0", "Z1", "Z2"}
                             : std::vector<std::string>{"Z0", "Z0Z1", "Z1"};
        cfg.state_bounds = bc ? std::vector<double>{0.5, 0.5, 0.5, 0.5, 3.0, 6.0}
                              : std::vector<double>{1, 1, 1, 1, 4 * kPi, 9 * kPi};
    } else if (env_id == "MountainCar-v0") {
        cfg.n_layers = 6;
        cfg.beta = 1.2;
        cfg.lr_policy = {0.1, 0.01, 0.1};
        cfg.reward_kind = "log_one_minus_d";
        cfg.observables = {"Z0", "Z0Z1", "Z1"};
        cfg.state_bounds = {1.2, 0.07};
        cfg.shaped_rewards = true;  // expert training only; evaluation stays true-reward
    } else if (env_id == "PointMass1D-v0") {
        cfg.gaussian = true;
        cfg.n_layers = bc ? 4 : 5;
        cfg.lr_policy = {0.07, 0.01, 0.001};
        cfg.reward_kind = "neg_log_d";
        cfg.observables = {"Z0Z1"};
        cfg.state_bounds = {2.0, 2.0};
        cfg.ppo = !bc && cfg.algorithm != "expert";
    } else {
        throw ConfigError("no defaults for env \"" + env_id + "\"");
    }
}

void apply_algorithm_defaults(RunConfig& cfg) {
    if (cfg.algorithm == "qbc") {
        cfg.iterations = cfg.env_id == "CartPole-v1" ? 400 : 600;
        cfg.eval_interval = 20;
    } else if (cfg.algorithm == "qgail") {
        cfg.iterations = 300;
        cfg.eval_interval = 10;
    } else if (cfg.algorithm == "expert") {
        cfg.iterations = 3000;
        cfg.eval_interval = 25;
        cfg.max_env_episodes = 40000;
        // REINFORCE expert trains on the wide-bound global-observable
        // architecture; stop once clearly at expert level.
        if (cfg.env_id == "CartPole-v1") {
            cfg.target_return = 490.0;
            cfg.demo_min_return = 475.0;
        } else if (cfg.env_id == "Acrobot-v1") {
            cfg.target_return = -105.0;
            cfg.demo_min_return = -110.0;
        } else if (cfg.env_id == "MountainCar-v0") {
            cfg.target_return = -105.0;
            cfg.demo_min_return = -130.0;
        }
    } else if (cfg.algorithm != "verify") {
        throw ConfigError("unknown algorithm \"" + cfg.algorithm +
                          "\" (want qbc, qgail, expert or verify)");
    }
}

}  // namespace

RunConfig default_config(const std::string& env_id, const std::string& algorithm) {
    RunConfig cfg;
    cfg.algorithm = algorithm;
    if (algorithm == "verify") return cfg;
    cfg.env_id = envs::make_env(env_id)->spec().id;  // canonicalize, validates the id
    apply_algorithm_defaults(cfg);
    apply_env_defaults(cfg, cfg.env_id);
    // The expert trains on the Q-GAIL architecture (wide bounds, global
    // observables) regardless of which algorithm the demos later feed.
    if (algorithm == "expert" && cfg.env_id != "PointMass1D-v0") {
        RunConfig gail = cfg;
        gail.algorithm = "qgail";
        apply_env_defaults(gail, cfg.env_id);
        cfg.observables = gail.observables;
        cfg.state_bounds = gail.state_bounds;
        cfg.n_layers = gail.n_layers;
    }
    return cfg;
}

// ----------------------------------------------------------------- overlay

namespace {

double want_number(const TomlValue& v, const std::string& key) {
    if (v.kind != TomlValue::Kind::Integer && v.kind != TomlValue::Kind::Float)
        throw ConfigError("config key \"" + key + "\" must be a number");
    return v.as_number();
}

long long want_int(const TomlValue& v, const std::string& key) {
    if (v.kind != TomlValue::Kind::Integer)
        throw ConfigError("config key \"" + key + "\" must be an integer");
    return v.i;
}

bool want_bool(const TomlValue& v, const std::string& key) {
    if (v.kind != TomlValue::Kind::Bool)
        throw ConfigError("config key \"" + key + "\" must be true or false");
    return v.b;
}

std::string want_string(const TomlValue& v, const std::string& key) {
    if (v.kind != TomlValue::Kind::String)
        throw ConfigError("config key \"" + key + "\" must be a string");
    return v.s;
}

std::vector<double> want_numbers(const TomlValue& v, const std::string& key) {
    if (v.kind != TomlValue::Kind::NumberArray)
        throw ConfigError("config key \"" + key + "\" must be a number array");
    return v.nums;
}

std::array<double, 3> want_lr3(const TomlValue& v, const std::string& key) {
    const std::vector<double> nums = want_numbers(v, key);
    if (nums.size() != 3)
        throw ConfigError("config key \"" + key + "\" must have exactly 3 entries");
    return {nums[0], nums[1], nums[2]};
}

}  // namespace

void apply_toml(RunConfig& cfg, const TomlTable& table) {
    for (const auto& [key, v] : table.items) {
        if (key == "env") {
            const std::string id = envs::make_env(want_string(v, key))->spec().id;
            if (!cfg.env_id.empty() && id != cfg.env_id)
                throw ConfigError("config env \"" + id + "\" conflicts with \"" + cfg.env_id +
                                  "\"");
            cfg.env_id = id;
        } else if (key == "algorithm") {
            const std::string a = want_string(v, key);
            if (a != cfg.algorithm)
                throw ConfigError("config algorithm \"" + a + "\" conflicts with \"" +
                                  cfg.algorithm + "\"");
        } else if (key == "layers") {
            cfg.n_layers = static_cast<int>(want_int(v, key));
        } else if (key == "observables") {
            if (v.kind != TomlValue::Kind::StringArray)
                throw ConfigError("config key \"observables\" must be a string array");
            cfg.observables = v.strs;
        } else if (key == "beta") {
            cfg.beta = want_number(v, key);
        } else if (key == "state_bounds") {
            cfg.state_bounds = want_numbers(v, key);
        } else if (key == "gaussian") {
            cfg.gaussian = want_bool(v, key);
        } else if (key == "lr_policy") {
            cfg.lr_policy = want_lr3(v, key);
        } else if (key == "lr_sigma") {
            cfg.lr_sigma = want_number(v, key);
        } else if (key == "iterations") {
            cfg.iterations = static_cast<int>(want_int(v, key));
        } else if (key == "batch_size") {
            cfg.batch_size = static_cast<int>(want_int(v, key));
        } else if (key == "traj_per_iter") {
            cfg.traj_per_iter = static_cast<int>(want_int(v, key));
        } else if (key == "max_env_episodes") {
            cfg.max_env_episodes = want_int(v, key);
        } else if (key == "gamma") {
            cfg.gamma = want_number(v, key);
        } else if (key == "eval_interval") {
            cfg.eval_interval = static_cast<int>(want_int(v, key));
        } else if (key == "eval_episodes") {
            cfg.eval_episodes = static_cast<int>(want_int(v, key));
        } else if (key == "target_return") {
            cfg.target_return = want_number(v, key);
        } else if (key == "lr_disc") {
            cfg.lr_disc = want_number(v, key);
        } else if (key == "reward_kind") {
            cfg.reward_kind = want_string(v, key);
            qgail::parse_reward_kind(cfg.reward_kind);  // validate
        } else if (key == "lr_disc_vqc") {
            cfg.lr_disc_vqc = want_lr3(v, key);
        } else if (key == "disc_vqc_layers") {
            cfg.disc_vqc_layers = static_cast<int>(want_int(v, key));
        } else if (key == "shaped_rewards") {
            cfg.shaped_rewards = want_bool(v, key);
        } else if (key == "demo_min_return") {
            cfg.demo_min_return = want_number(v, key);
        } else if (key == "n_demo_trajectories") {
            cfg.n_demo_trajectories = static_cast<int>(want_int(v, key));
        } else if (key == "train_lambda") {
            cfg.train_lambda = want_bool(v, key);
        } else if (key == "train_nu") {
            cfg.train_nu = want_bool(v, key);
        } else if (key == "spectral_norm") {
            cfg.spectral_norm = want_bool(v, key);
        } else if (key == "quantum_disc") {
            cfg.quantum_disc = want_bool(v, key);
        } else if (key == "ppo") {
            cfg.ppo = want_bool(v, key);
        } else if (key == "ppo_clip") {
            cfg.ppo_clip = want_number(v, key);
        } else if (key == "ppo_target_kl") {
            cfg.ppo_target_kl = want_number(v, key);
        } else if (key == "ppo_epochs") {
            cfg.ppo_epochs = static_cast<int>(want_int(v, key));
        } else if (key == "seeds") {
            const std::vector<double> nums = want_numbers(v, key);
            if (nums.empty()) throw ConfigError("config key \"seeds\" must not be empty");
            cfg.seeds.clear();
            for (double x : nums) {
                if (x < 0 || x != std::floor(x))
                    throw ConfigError("config key \"seeds\" must hold nonnegative integers");
                cfg.seeds.push_back(static_cast<std::uint64_t>(x));
            }
        } else {
            throw ConfigError("unknown config key \"" + key + "\"");
        }
    }
}

TomlTable to_toml(const RunConfig& cfg) {
    TomlTable t;
    t.set("env", TomlValue::of(cfg.env_id));
    t.set("algorithm", TomlValue::of(cfg.algorithm));
    t.set("layers", TomlValue::of(static_cast<long long>(cfg.n_layers)));
    t.set("observables", TomlValue::of(cfg.observables));
    t.set("beta", TomlValue::of(cfg.beta));
    t.set("state_bounds", TomlValue::of(cfg.state_bounds));
    t.set("gaussian", TomlValue::of(cfg.gaussian));
    t.set("lr_policy",
          TomlValue::of(std::vector<double>{cfg.lr_policy[0], cfg.lr_policy[1], cfg.lr_policy[2]}));
    t.set("lr_sigma", TomlValue::of(cfg.lr_sigma));
    t.set("iterations", TomlValue::of(static_cast<long long>(cfg.iterations)));
    t.set("batch_size", TomlValue::of(static_cast<long long>(cfg.batch_size)));
    t.set("traj_per_iter", TomlValue::of(static_cast<long long>(cfg.traj_per_iter)));
    t.set("max_env_episodes", TomlValue::of(static_cast<long long>(cfg.max_env_episodes)));
    t.set("gamma", TomlValue::of(cfg.gamma));
    t.set("eval_interval", TomlValue::of(static_cast<long long>(cfg.eval_interval)));
    t.set("eval_episodes", TomlValue::of(static_cast<long long>(cfg.eval_episodes)));
    t.set("target_return", TomlValue::of(cfg.target_return));
    t.set("lr_disc", TomlValue::of(cfg.lr_disc));
    t.set("reward_kind", TomlValue::of(cfg.reward_kind));
    t.set("lr_disc_vqc", TomlValue::of(std::vector<double>{cfg.lr_disc_vqc[0], cfg.lr_disc_vqc[1],
                                                           cfg.lr_disc_vqc[2]}));
    t.set("disc_vqc_layers", TomlValue::of(static_cast<long long>(cfg.disc_vqc_layers)));
    t.set("shaped_rewards", TomlValue::of(cfg.shaped_rewards));
    t.set("demo_min_return", TomlValue::of(cfg.demo_min_return));
    t.set("n_demo_trajectories", TomlValue::of(static_cast<long long>(cfg.n_demo_trajectories)));
    t.set("train_lambda", TomlValue::of(cfg.train_lambda));
    t.set("train_nu", TomlValue::of(cfg.train_nu));
    t.set("spectral_norm", TomlValue::of(cfg.spectral_norm));
    t.set("quantum_disc", TomlValue::of(cfg.quantum_disc));
    t.set("ppo", TomlValue::of(cfg.ppo));
    t.set("ppo_clip", TomlValue::of(cfg.ppo_clip));
    t.set("ppo_target_kl", TomlValue::of(cfg.ppo_target_kl));
    t.set("ppo_epochs", TomlValue::of(static_cast<long long>(cfg.ppo_epochs)));
    std::vector<double> seeds;
    for (std::uint64_t s : cfg.seeds) seeds.push_back(static_cast<double>(s));
    t.set("seeds", TomlValue::of(seeds));
    return t;
}

// ------------------------------------------------------------------ wiring

vqc::VqcPolicy make_policy(const RunConfig& cfg, std::uint64_t seed) {
    if (cfg.env_id.empty()) throw ConfigError("make_policy: config has no env");
    const envs::EnvSpec sp = envs::make_env(cfg.env_id)->spec();
    vqc::VqcPolicy p;
    p.arch.n_qubits = sp.state_dim;
    p.arch.n_layers = cfg.n_layers;
    for (const std::string& o : cfg.observables)
        p.arch.observables.push_back(qsim::PauliObservable::parse(o));
    p.arch.validate();
    if (static_cast<int>(cfg.state_bounds.size()) != sp.state_dim)
        throw ConfigError("make_policy: state_bounds size does not match the env state dim");
    p.enc.state_bounds = cfg.state_bounds;
    p.gaussian = cfg.gaussian;
    if (p.gaussian != !sp.discrete)
        throw ConfigError("make_policy: gaussian flag does not match the env action space");
    if (!p.gaussian && p.arch.n_actions() != sp.n_actions)
        throw ConfigError("make_policy: need one observable per action (" +
                          std::to_string(sp.n_actions) + ")");
    std::mt19937_64 rng = make_rng(seed, 0x9071ULL);
    p.params = vqc::PolicyParameters::init(p.arch, rng);
    p.params.beta = cfg.beta;
    return p;
}

qbc::QbcConfig make_qbc_config(const RunConfig& cfg, std::uint64_t seed) {
    qbc::QbcConfig c;
    c.env_id = cfg.env_id;
    c.seed = seed;
    c.iterations = cfg.iterations;
    c.batch_size = cfg.batch_size;
    c.lr_policy = cfg.lr_policy;
    c.lr_sigma = cfg.lr_sigma;
    c.eval_interval = cfg.eval_interval;
    c.eval_episodes = cfg.eval_episodes;
    c.target_return = cfg.target_return;
    c.train_lambda = cfg.train_lambda;
    c.train_nu = cfg.train_nu;
    return c;
}

qgail::QgailConfig make_qgail_config(const RunConfig& cfg, std::uint64_t seed) {
    qgail::QgailConfig c;
    c.env_id = cfg.env_id;
    c.seed = seed;
    c.iterations = cfg.iterations;
    c.traj_per_iter = cfg.traj_per_iter;
    c.max_env_episodes = cfg.max_env_episodes;
    c.gamma = cfg.gamma;
    c.lr_policy = cfg.lr_policy;
    c.lr_sigma = cfg.lr_sigma;
    c.lr_disc = cfg.lr_disc;
    c.reward_kind = qgail::parse_reward_kind(cfg.reward_kind);
    c.spectral_norm = cfg.spectral_norm;
    c.quantum_disc = cfg.quantum_disc;
    c.lr_disc_vqc = cfg.lr_disc_vqc;
    c.disc_vqc_layers = cfg.disc_vqc_layers;
    c.eval_interval = cfg.eval_interval;
    c.eval_episodes = cfg.eval_episodes;
    c.target_return = cfg.target_return;
    c.ppo = cfg.ppo;
    c.ppo_clip = cfg.ppo_clip;
    c.ppo_target_kl = cfg.ppo_target_kl;
    c.ppo_epochs = cfg.ppo_epochs;
    c.train_lambda = cfg.train_lambda;
    c.train_nu = cfg.train_nu;
    return c;
}

expert::ExpertConfig make_expert_config(const RunConfig& cfg, std::uint64_t seed) {
    expert::ExpertConfig c;
    c.env_id = cfg.env_id;
    c.seed = seed;
    c.iterations = cfg.iterations;
    c.traj_per_iter = cfg.traj_per_iter;
    c.gamma = cfg.gamma;
    c.lr_policy = cfg.lr_policy;
    c.lr_sigma = cfg.lr_sigma;
    c.eval_interval = cfg.eval_interval;
    c.eval_episodes = cfg.eval_episodes;
    c.target_return = cfg.target_return;
    c.shaped_rewards = cfg.shaped_rewards;
    return c;
}

}  // namespace qil::config
