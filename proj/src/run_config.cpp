#include "epduct/run_config.hpp"

#include <fstream>
#include <sstream>

namespace epduct {

BackgroundParams RunConfig::background_params() const {
    BackgroundParams p;
    p.gas = gas();
    p.b0 = b0;
    p.u0 = u0;
    p.e0 = e0;
    p.delta = delta;
    p.length_request = bg_length;
    p.step = bg_step;
    return p;
}

IterationConfig RunConfig::iteration_config() const {
    IterationConfig c;
    c.epsilon = epsilon;
    c.sigma_bar = sigma_bar;
    c.max_iter = max_iter;
    c.contraction_tol = contraction_tol;
    c.residual_tol = residual_tol;
    c.under_relaxation = under_relax;
    c.r_factor = r_factor;
    c.m_max = m_max;
    c.threads = threads;
    return c;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    const int i = int(std::lround(x));
    if (std::abs(x - i) > 1e-12) throw ConfigError("config: expected integer for " + key);
    return i;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config: expected boolean for " + key);
}

SyntheticMode parse_mode(const std::string& v) {
    std::istringstream is(v);
    std::string target;
    SyntheticMode m;
    if (!(is >> target >> m.k >> m.l >> m.amplitude))
        throw ConfigError("config: data.mode expects '<target> <k> <l> <amplitude> [j1]', got '" +
                          v + "'");
    is >> m.j1;  // optional
    if (target == "b") m.target = SyntheticMode::Target::B;
    else if (target == "u_en") m.target = SyntheticMode::Target::UEn;
    else if (target == "e_en") m.target = SyntheticMode::Target::EEn;
    else if (target == "phi_ex") m.target = SyntheticMode::Target::PhiEx;
    else if (target == "sine")
        m.sine = true;  // rejected downstream with a meaningful message
    else
        throw ConfigError("config: unknown data.mode target '" + target + "'");
    return m;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v,
                          T (*conv)(const std::string&, const std::string&)) {
    std::vector<T> out;
    std::string tok;
    std::istringstream is(v);
    while (std::getline(is, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(conv(key, tok));
    }
    if (out.empty()) throw ConfigError("config: empty list for " + key);
    return out;
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "gas.gamma") cfg.gamma = to_double(key, value);
    else if (key == "gas.j0") cfg.j0 = to_double(key, value);
    else if (key == "background.b0") cfg.b0 = to_double(key, value);
    else if (key == "background.u0") cfg.u0 = to_double(key, value);
    else if (key == "background.e0") cfg.e0 = to_double(key, value);
    else if (key == "background.delta") cfg.delta = to_double(key, value);
    else if (key == "background.length") cfg.bg_length = to_double(key, value);
    else if (key == "background.step") cfg.bg_step = to_double(key, value);
    else if (key == "duct.length") cfg.length = to_double(key, value);
    else if (key == "duct.n1") cfg.n1 = to_int(key, value);
    else if (key == "duct.n2") cfg.n2 = to_int(key, value);
    else if (key == "duct.n3") cfg.n3 = to_int(key, value);
    else if (key == "solver.m_max") cfg.m_max = to_int(key, value);
    else if (key == "solver.max_iter") cfg.max_iter = to_int(key, value);
    else if (key == "solver.epsilon") cfg.epsilon = to_double(key, value);
    else if (key == "solver.sigma_bar") cfg.sigma_bar = to_double(key, value);
    else if (key == "solver.contraction_tol") cfg.contraction_tol = to_double(key, value);
    else if (key == "solver.residual_tol") cfg.residual_tol = to_double(key, value);
    else if (key == "solver.under_relax") cfg.under_relax = to_double(key, value);
    else if (key == "solver.r_factor") cfg.r_factor = to_double(key, value);
    else if (key == "solver.threads") cfg.threads = to_int(key, value);
    else if (key == "weight.w0") cfg.weight_w0 = to_double(key, value);
    else if (key == "weight.margin") cfg.weight_margin = to_double(key, value);
    else if (key == "weight.sweep_points") cfg.weight_sweep_points = to_int(key, value);
    else if (key == "data.source") {
        if (value != "synthetic" && value != "files")
            throw ConfigError("config: data.source must be 'synthetic' or 'files'");
        cfg.data_source = value;
    } else if (key == "data.manifest") cfg.data_manifest = value;
    else if (key == "data.mode") cfg.modes.push_back(parse_mode(value));
    else if (key == "data.sigma_target") cfg.sigma_target = to_double(key, value);
    else if (key == "sweep.sigma_factors")
        cfg.sigma_factors = parse_list<double>(key, value, to_double);
    else if (key == "verify.n1_list") cfg.verify_n1 = parse_list<int>(key, value, to_int);
    else if (key == "verify.inject_corruption") cfg.inject_corruption = to_bool(key, value);
    else if (key == "output.dir") cfg.out_dir = value;
    else if (key == "output.fields") cfg.write_fields = to_bool(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << path << ":" << lineno << ": expected 'key = value'";
            throw ConfigError(os.str());
        }
        apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

}  // namespace epduct
