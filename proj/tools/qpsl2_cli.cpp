// Command-line front end: dynamical invariants, continued fractions,
// renormalization sweeps, cone monitors, zeta scans, local reduction, and the
// perturbation constructions, with CSV artifacts and a JSON result envelope.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpsl2/cocycle.hpp"
#include "qpsl2/complex_rotation.hpp"
#include "qpsl2/cone_monitors.hpp"
#include "qpsl2/continued_fraction.hpp"
#include "qpsl2/invariants.hpp"
#include "qpsl2/reducibility.hpp"
#include "qpsl2/renormalization.hpp"
#include "qpsl2/selftest.hpp"

using nlohmann::json;
using namespace qpsl2;

namespace {

struct RunConfig {
    double alpha = 0.6180339887498948482;
    std::string map_file;
    double rotation = std::numeric_limits<double>::quiet_NaN();  // turns
    std::string out_dir = ".";
    int grid = scheme().grid_default;
    int depth = 8;
    double tolerance = 1e-10;
    long long seed = 1;
    long long n = 100000;
    int samples = scheme().lyapunov_samples;
    double margin = 0.5;
    double eps = 0.1;
    int smooth = 2;
    double angle = 0.3;      // radians, perturb-hyperbolic target
    double delta = 0.01;     // destabilizer bump width
    std::string betas = "0.1:0.7:8";
    std::string radii = "0.9,0.99,0.999";
    double gamma = 10.0, sigma = 1.5;

    void validate() const {
        if (tolerance <= 0) throw Error(Errc::config_invalid, "tolerance must be positive");
        if (grid <= 0 || (grid & (grid - 1)) != 0)
            throw Error(Errc::config_invalid, "grid size must be a power of two");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw Error(Errc::config_invalid, "alpha must lie in (0,1)");
    }

    std::string canonical() const {
        char buf[512];
        std::snprintf(buf, sizeof buf, "a=%.17g;m=%s;r=%.17g;g=%d;d=%d;t=%.17g;s=%lld;n=%lld",
                      alpha, map_file.c_str(), rotation, grid, depth, tolerance, seed, n);
        return buf;
    }
};

std::string fnv_digest(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw Error(Errc::command_failed, "cannot open " + path);
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << (i ? "," : "") << header[i];
        out_ << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
        ++rows_;
    }
    long long rows() const { return rows_; }

  private:
    std::ofstream out_;
    long long rows_ = 0;
};

QpCocycle load_cocycle(const RunConfig& cfg) {
    if (!cfg.map_file.empty()) {
        std::ifstream in(cfg.map_file);
        if (!in) throw Error(Errc::config_invalid, "cannot read map file " + cfg.map_file);
        json doc = json::parse(in);
        QpCocycle c;
        c.alpha = cfg.alpha;
        c.map = Sl2Map::from_json(doc.at("map"));
        return c;
    }
    const double psi = std::isnan(cfg.rotation) ? 0.25 : cfg.rotation;
    return {cfg.alpha, Sl2Map::constant(Mat2R::rotation(kTwoPi * psi))};
}

void emit_envelope(const std::string& command, const RunConfig& cfg, long long rows,
                   const json& diagnostics) {
    json env;
    env["command"] = command;
    env["config_digest"] = fnv_digest(command + "|" + cfg.canonical());
    env["rows"] = rows;
    env["diagnostics"] = diagnostics;
    std::cout << env.dump(2) << "\n";
}

int cmd_invariants(const RunConfig& cfg) {
    const QpCocycle c = load_cocycle(cfg);
    CsvWriter csv(cfg.out_dir + "/invariants.csv",
                  {"parameter", "rotation_number", "lyapunov", "rotation_residual",
                   "lyapunov_residual"});
    const auto lyap = lyapunov_exponent(c, cfg.n, cfg.samples);
    double rot = std::numeric_limits<double>::quiet_NaN(), rot_res = rot;
    json diag;
    if (degree(c.map) == 0) {
        const auto r = fibered_rotation_number(c, cfg.n);
        rot = r.value;
        rot_res = r.residual;
    } else {
        diag["note"] = "nonzero degree: rotation number skipped";
    }
    csv.row({g17(c.alpha), g17(rot), g17(lyap.value), g17(rot_res), g17(lyap.residual)});
    diag["lyapunov_median"] = lyap.median;
    emit_envelope("invariants", cfg, csv.rows(), diag);
    return 0;
}

int cmd_cf(const RunConfig& cfg) {
    const auto cf = expand(cfg.alpha, cfg.depth);
    CsvWriter csv(cfg.out_dir + "/cf.csv", {"k", "a_k", "p_k", "q_k", "beta_k", "alpha_k"});
    for (int k = 0; k <= cf.depth(); ++k) {
        csv.row({std::to_string(k),
                 std::to_string(k > 0 ? cf.a[static_cast<std::size_t>(k)] : 0),
                 int128_str(cf.p[static_cast<std::size_t>(k)]),
                 int128_str(cf.q[static_cast<std::size_t>(k)]),
                 g17(cf.beta[static_cast<std::size_t>(k)]),
                 g17(cf.alpha_k[static_cast<std::size_t>(k)])});
    }
    json diag;
    diag["status"] = cf.status == CfStatus::ok
                         ? "ok"
                         : (cf.status == CfStatus::rational_stop ? "RATIONAL_STOP" : "DEPTH_LIMIT");
    const auto cert = cd_test(cfg.alpha, cfg.gamma, cfg.sigma, 10000);
    diag["cd_margin"] = cert.margin;
    diag["cd_valid"] = cert.valid();
    if (cf.depth() >= 2)
        diag["sigma_window_hits"] = sigma_window_search(cf, cfg.gamma, cfg.sigma).size();
    emit_envelope("cf", cfg, csv.rows(), diag);
    return 0;
}

int cmd_renorm(const RunConfig& cfg) {
    const QpCocycle c = load_cocycle(cfg);
    const auto cf = expand(cfg.alpha, cfg.depth + 1);
    CsvWriter csv(cfg.out_dir + "/renorm.csv",
                  {"k", "beta_km1", "alpha_k", "commutation_defect", "distance_to_E_r", "r"});
    RenormState st = renorm_init(c, cf);
    for (int k = 1; k <= std::min(cfg.depth, cf.depth()); ++k) {
        st = renorm_step(st);
        const FiberedAction resc = rescaled_pair(st);
        double comm = 0;
        for (int j = 0; j <= 64; ++j) {
            const double t = -3.0 + 6.0 * j / 64.0;
            const Mat2R lhs = resc.gen2.map(t + 1.0) * resc.gen1.map(t);
            const Mat2R rhs = resc.gen1.map(t + resc.gen2.freq) * resc.gen2.map(t);
            comm = std::max(comm, (lhs - rhs).frob());
        }
        const auto prox = proximity_to_rotation_model(st);
        csv.row({std::to_string(k), g17(cf.beta_prev(k)),
                 g17(cf.alpha_k[static_cast<std::size_t>(k)]), g17(comm), g17(prox.distance),
                 std::to_string(prox.r)});
    }
    emit_envelope("renorm", cfg, csv.rows(), json::object());
    return 0;
}

int cmd_monitors(const RunConfig& cfg) {
    const QpCocycle c = load_cocycle(cfg);
    const auto cf = expand(cfg.alpha, cfg.depth + 2);
    const ConeDecomposition dec(c, cfg.margin);
    CsvWriter csv(cfg.out_dir + "/monitors.csv",
                  {"k", "e_p", "e_m", "f_p", "f_m", "u_p", "u_m", "ubar_p", "ubar_m", "ubar",
                   "eps_k", "sigma_window"});
    json diag;
    diag["measured_M"] = measured_bound_constant(c, dec);
    for (int k = 1; k <= std::min(cfg.depth, cf.depth() - 2); ++k) {
        const auto q = integrated_quantities(c, dec, cf, k);
        const auto pt = decay_point(c, dec, cf, k, 93);
        csv.row({std::to_string(k), g17(q.e_p), g17(q.e_m), g17(q.f_p), g17(q.f_m), g17(q.u_p),
                 g17(q.u_m), g17(q.ubar_p), g17(q.ubar_m), g17(q.ubar), g17(pt.eps),
                 pt.sigma_window ? "1" : "0"});
    }
    emit_envelope("monitors", cfg, csv.rows(), diag);
    return 0;
}

std::vector<double> parse_range(const std::string& spec) {
    // "a:b:n" linear range or comma-separated list
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double a = 0, b = 0;
        int n = 0;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &a, &b, &n) != 3 || n < 1)
            throw Error(Errc::config_invalid, "range must be a:b:n");
        for (int j = 0; j < n; ++j)
            out.push_back(n == 1 ? a : a + (b - a) * j / (n - 1));
        return out;
    }
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

int cmd_zeta_scan(const RunConfig& cfg) {
    const QpCocycle c = load_cocycle(cfg);
    const auto betas = parse_range(cfg.betas);
    const auto radii = parse_range(cfg.radii);
    const auto rows = boundary_scan(c, betas, radii, cfg.grid, cfg.tolerance, cfg.n);
    CsvWriter csv(cfg.out_dir + "/zeta.csv",
                  {"beta", "r", "re_zeta", "im_zeta", "lyap_direct", "rot_direct",
                   "zero_exponent_candidate"});
    int candidates = 0;
    for (const auto& row : rows) {
        csv.row({g17(row.beta), g17(row.r), g17(row.re), g17(row.im), g17(row.lyap_direct),
                 g17(row.rot_direct), row.zero_exponent_candidate ? "1" : "0"});
        if (row.r == 0.0 && row.zero_exponent_candidate) ++candidates;
    }
    json diag;
    diag["zero_exponent_candidates"] = candidates;
    emit_envelope("zeta-scan", cfg, csv.rows(), diag);
    return 0;
}

int cmd_reduce(const RunConfig& cfg) {
    const QpCocycle c = load_cocycle(cfg);
    const KamResult res = kam_reduce_local(c, cfg.depth, cfg.grid, cfg.tolerance);
    json conj;
    conj["alpha"] = c.alpha;
    conj["map"] = res.b_map.to_json();
    std::ofstream out(cfg.out_dir + "/conjugacy.json");
    out << conj.dump(2) << "\n";
    json diag;
    diag["steps"] = res.steps;
    diag["defect"] = res.defect;
    diag["rho_a0"] = res.rho_a0;
    diag["a0"] = {res.a0.a, res.a0.b, res.a0.c, res.a0.d};
    emit_envelope("reduce", cfg, 1, diag);
    return 0;
}

int cmd_perturb(const RunConfig& cfg) {
    const Mat2R a0 = Mat2R::rotation(cfg.angle);
    const auto nb = hyperbolic_neighbor(a0, cfg.alpha, cfg.eps, cfg.smooth);
    json doc;
    doc["alpha"] = cfg.alpha;
    doc["map"] = nb.map.to_json();
    std::ofstream out(cfg.out_dir + "/hyperbolic_neighbor.json");
    out << doc.dump(2) << "\n";
    CsvWriter csv(cfg.out_dir + "/perturb.csv", {"k", "log_spec_h", "cs_distance", "lyapunov"});
    const double dist = cs_distance(nb.map, a0, cfg.smooth);
    const auto lyap = lyapunov_exponent({cfg.alpha, nb.map}, cfg.n, 4);
    csv.row({std::to_string(nb.k), g17(nb.log_spec_h), g17(dist), g17(lyap.value)});
    emit_envelope("perturb-hyperbolic", cfg, csv.rows(), json::object());
    return 0;
}

int cmd_destabilize(const RunConfig& cfg) {
    const QpCocycle c = load_cocycle(cfg);  // the map is the conjugacy B
    const auto res = schrodinger_destabilizer(c.map, cfg.delta);
    CsvWriter csv(cfg.out_dir + "/destabilize.csv", {"x", "y", "lambda", "mu", "nu", "margin"});
    csv.row({g17(res.x), g17(res.y), g17(res.lambda), g17(res.mu), g17(res.nu), g17(res.margin)});
    CsvWriter wcsv(cfg.out_dir + "/destabilize_bump.csv", {"theta", "w"});
    for (int j = 0; j < cfg.grid; ++j) {
        const double t = static_cast<double>(j) / cfg.grid;
        wcsv.row({g17(t), g17(res.w(t))});
    }
    json diag;
    diag["margin_positive"] = res.margin > 0;
    emit_envelope("destabilize-schrodinger", cfg, csv.rows(), diag);
    return 0;
}

int cmd_selftest(const RunConfig& cfg) {
    const auto results = qpsl2::selftest::run_all();
    bool all = true;
    for (const auto& r : results) {
        std::printf("[%2d] %s  %s (%s)\n", r.id, r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str());
        all = all && r.pass;
    }
    json diag;
    diag["passed"] = all;
    emit_envelope("selftest", cfg, static_cast<long long>(results.size()), diag);
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamical invariants and renormalization for quasi-periodic SL(2,R) cocycles"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&cfg](CLI::App* sub) {
        sub->add_option("--alpha", cfg.alpha, "base frequency in (0,1)");
        sub->add_option("--map", cfg.map_file, "cocycle document (JSON)");
        sub->add_option("--rotation", cfg.rotation, "constant rotation map, angle in turns");
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--grid", cfg.grid, "grid size (power of two)");
        sub->add_option("--depth", cfg.depth, "expansion / iteration depth");
        sub->add_option("--tol", cfg.tolerance, "iteration tolerance");
        sub->add_option("--seed", cfg.seed, "seed for randomized sweeps");
        sub->add_option("--n", cfg.n, "Birkhoff iteration count");
    };

    auto* inv = app.add_subcommand("invariants", "rotation number and Lyapunov exponent");
    add_common(inv);
    inv->add_option("--samples", cfg.samples, "theta samples for the Lyapunov average");

    auto* cf = app.add_subcommand("cf", "continued-fraction expansion table");
    add_common(cf);
    cf->add_option("--gamma", cfg.gamma, "CD gamma");
    cf->add_option("--sigma", cfg.sigma, "CD sigma");

    auto* ren = app.add_subcommand("renorm", "renormalization sweep");
    add_common(ren);

    auto* mon = app.add_subcommand("monitors", "cone-field monitors");
    add_common(mon);
    mon->add_option("--margin", cfg.margin, "decomposition margin");

    auto* zs = app.add_subcommand("zeta-scan", "complex rotation number boundary scan");
    add_common(zs);
    zs->add_option("--betas", cfg.betas, "boundary angles a:b:n or list");
    zs->add_option("--radii", cfg.radii, "radii list toward 1");

    auto* red = app.add_subcommand("reduce", "local KAM reduction to a constant");
    add_common(red);

    auto* per =
        app.add_subcommand("perturb-hyperbolic", "hyperbolic neighbor of an elliptic constant");
    per->alias("perturb");
    add_common(per);
    per->add_option("--angle", cfg.angle, "rotation angle of A0, radians");
    per->add_option("--eps", cfg.eps, "perturbation budget");
    per->add_option("--smooth", cfg.smooth, "C^s distance order");

    auto* des =
        app.add_subcommand("destabilize-schrodinger", "destabilizing bump from a conjugacy");
    des->alias("destabilize");
    add_common(des);
    des->add_option("--delta", cfg.delta, "bump width");

    auto* st = app.add_subcommand("selftest", "run the acceptance suite");
    add_common(st);

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.validate();
        if (inv->parsed()) return cmd_invariants(cfg);
        if (cf->parsed()) return cmd_cf(cfg);
        if (ren->parsed()) return cmd_renorm(cfg);
        if (mon->parsed()) return cmd_monitors(cfg);
        if (zs->parsed()) return cmd_zeta_scan(cfg);
        if (red->parsed()) return cmd_reduce(cfg);
        if (per->parsed()) return cmd_perturb(cfg);
        if (des->parsed()) return cmd_destabilize(cfg);
        if (st->parsed()) return cmd_selftest(cfg);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: COMMAND_FAILED: %s\n", e.what());
        return 2;
    }
    return 0;
}
