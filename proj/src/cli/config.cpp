#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ratings/cli.hpp"
#include "ratings/numeric.hpp"

namespace ratings::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

double to_number(const std::string& key, const std::string& text) {
    if (text.empty()) throw InputError("missing value for '" + key + "'");
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE)
        throw InputError("'" + key + "' is not a number: " + text);
    return v;
}

void assign(RunConfig& cfg, const std::string& key, double v) {
    auto& p = cfg.params;
    if (key == "delta") p.delta = v;
    else if (key == "alpha") p.alpha = v;
    else if (key == "u_high") p.u_high = v;
    else if (key == "u_low") p.u_low = v;
    else if (key == "price") p.price = v;
    else if (key == "k") p.k = v;
    else if (key == "buyer_mass" || key == "Q") p.buyer_mass = v;
    else if (key == "lambda_g") cfg.lambda_g = v;
    else if (key == "lambda_b") cfg.lambda_b = v;
    else if (key == "horizon") {
        if (!(v > 0.0)) throw InputError("horizon must be positive");
        cfg.horizon = v;
    } else if (key == "sellers") {
        if (!(v >= 1.0) || v != std::floor(v) || v > 1e9)
            throw InputError("sellers must be a positive integer");
        cfg.sellers = static_cast<std::size_t>(v);
    } else {
        throw InputError("unknown config key '" + key + "'");
    }
}

}  // namespace

RunConfig parse_config_text(std::string_view text) {
    RunConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw InputError("line " + std::to_string(lineno) + ": expected name = value");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        assign(cfg, key, to_number(key, trim(std::string_view(body).substr(eq + 1))));
    }
    return cfg;
}

RunConfig parse_config_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("bad JSON config: ") + e.what());
    }
    if (!doc.is_object()) throw InputError("JSON config must be an object");
    RunConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        if (!value.is_number()) throw InputError("'" + key + "' is not a number");
        assign(cfg, key, value.get<double>());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (path.extension() == ".json") return parse_config_json(buf.str());
    return parse_config_text(buf.str());
}

std::vector<double> Axis::values() const {
    return log ? numeric::log_grid(lo, hi, count) : numeric::lin_grid(lo, hi, count);
}

std::vector<Axis> parse_grid(std::string_view spec) {
    std::vector<Axis> axes;
    std::string all(spec);
    std::istringstream parts(all);
    std::string part;
    while (std::getline(parts, part, ',')) {
        part = trim(part);
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw InputError("grid axis needs name=lo:hi:n[:log]: " + part);
        Axis a;
        a.name = trim(std::string_view(part).substr(0, eq));
        if (a.name == "buyer_mass") a.name = "Q";
        if (a.name != "k" && a.name != "Q" && a.name != "beta")
            throw InputError("grid axis must be k, Q or beta, got '" + a.name + "'");
        std::vector<std::string> f;
        std::istringstream fields(part.substr(eq + 1));
        std::string field;
        while (std::getline(fields, field, ':')) f.push_back(trim(field));
        if (f.size() < 3 || f.size() > 4) throw InputError("grid axis needs name=lo:hi:n[:log]: " + part);
        a.lo = to_number(a.name, f[0]);
        a.hi = to_number(a.name, f[1]);
        const double n = to_number(a.name, f[2]);
        if (!(n >= 1.0) || n != std::floor(n) || n > 1e6)
            throw InputError("grid point count must be a positive integer: " + f[2]);
        a.count = static_cast<std::size_t>(n);
        if (f.size() == 4) {
            if (f[3] == "log") a.log = true;
            else if (f[3] != "lin") throw InputError("grid spacing must be lin or log: " + f[3]);
        }
        if (!std::isfinite(a.lo) || !std::isfinite(a.hi) || a.lo > a.hi)
            throw InputError("grid range must satisfy lo <= hi: " + part);
        if (a.log && !(a.lo > 0.0)) throw InputError("log grid needs lo > 0: " + part);
        for (const auto& other : axes)
            if (other.name == a.name) throw InputError("grid axis repeated: " + a.name);
        axes.push_back(a);
    }
    if (axes.empty() || axes.size() > 2) throw InputError("grid needs one or two axes");
    return axes;
}

MarketParams apply_axis(const MarketParams& base, const std::string& name, double value) {
    ParamRecord r{base.delta, base.alpha, base.u_high, base.u_low, base.price, base.k, base.buyer_mass};
    if (name == "k") r.k = value;
    else if (name == "Q") r.buyer_mass = value;
    else if (name == "beta") r.delta = value > 0.0 ? base.alpha / value : 0.0;
    else throw InputError("unknown grid axis '" + name + "'");
    return validate_params(r);
}

}  // namespace ratings::cli
