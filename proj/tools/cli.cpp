#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "hdsteer/channels.hpp"
#include "hdsteer/conic.hpp"
#include "hdsteer/quantifiers.hpp"
#include "hdsteer/steering.hpp"
#include "hdsteer/witnesses.hpp"

namespace hdsteer::cli {

namespace {

using io::Json;
using io::ParseError;

const Json& require(const Json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("scenario is missing \"") + key + "\"");
    return *it;
}

std::size_t get_size(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ParseError(std::string("\"") + key + "\" must be a non-negative integer");
    return v.get<std::size_t>();
}

std::size_t get_size(const Json& j, const char* key, std::size_t fallback) {
    return j.contains(key) ? get_size(j, key) : fallback;
}

double get_double(const Json& j, const char* key, double fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) throw ParseError(std::string("\"") + key + "\" must be a number");
    return it->get<double>();
}

std::string get_string(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_string()) throw ParseError(std::string("\"") + key + "\" must be a string");
    return v.get<std::string>();
}

// Seeded generator; the seed actually used is echoed in reports that sample.
struct Sampler {
    std::uint64_t seed;
    std::mt19937_64 engine;
    bool used = false;

    explicit Sampler(std::uint64_t s) : seed(s), engine(s) {}

    CMatrix haar_unitary(std::size_t d) {
        used = true;
        std::normal_distribution<double> normal(0.0, 1.0);
        CMatrix g(d, d);
        for (Eigen::Index r = 0; r < g.rows(); ++r)
            for (Eigen::Index c = 0; c < g.cols(); ++c) g(r, c) = Complex(normal(engine), normal(engine));
        const Eigen::HouseholderQR<CMatrix> qr(g);
        CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
        const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Eigen::Index k = 0; k < q.cols(); ++k) q.col(k) *= r(k, k) / std::abs(r(k, k));
        return q;
    }
};

BipartiteState make_state(const Json& j) {
    if (!j.contains("generator")) return io::state_from_json(j);
    const std::string g = get_string(j, "generator");
    const std::size_t d = get_size(j, "d");
    if (g == "isotropic") return isotropic(d, get_double(j, "eta", 1.0));
    if (g == "phi_plus") return isotropic(d, 1.0);
    if (g == "maximally_mixed") return isotropic(d, 0.0);
    throw ParseError("unknown state generator \"" + g + "\"");
}

MeasurementSet make_measurements(const Json& j, Sampler& sampler) {
    if (!j.contains("generator")) return io::measurements_from_json(j);
    const std::string g = get_string(j, "generator");
    const std::size_t d = get_size(j, "d");
    const double eta = get_double(j, "eta", 1.0);
    if (g == "fourier_mub") return fourier_mub_measurements(d, eta);
    if (g == "haar_pvm") {
        NoisyPvmFamily family{d, eta, {}};
        const std::size_t inputs = get_size(j, "inputs", 2);
        for (std::size_t x = 0; x < inputs; ++x) family.unitaries.push_back(sampler.haar_unitary(d));
        return family.members();
    }
    throw ParseError("unknown measurement generator \"" + g + "\"");
}

KrausChannel make_channel(const Json& j) {
    if (!j.contains("generator")) return io::channel_from_json(j);
    const std::string g = get_string(j, "generator");
    const std::size_t d = get_size(j, "d");
    if (g == "depolarizing") return depolarizing(d, get_double(j, "eta", 1.0));
    if (g == "identity") return KrausChannel::identity(d);
    throw ParseError("unknown channel generator \"" + g + "\"");
}

DensityMatrix make_density(const Json& j) { return DensityMatrix(io::matrix_from_json(j)); }

// Assemblage from an explicit payload, or from a state steered by measurements
// (Fourier MUBs on subsystem A by default).
Assemblage make_assemblage(const Json& s, Sampler& sampler) {
    if (s.contains("assemblage")) return io::assemblage_from_json(s["assemblage"]);
    const BipartiteState rho = make_state(require(s, "state"));
    const MeasurementSet m = s.contains("measurements") ? make_measurements(s["measurements"], sampler)
                                                        : fourier_mub_measurements(rho.dim_a());
    return steer(rho, m);
}

void record_seed(Json& report, const Sampler& sampler) {
    if (sampler.used) report["seed"] = sampler.seed;
}

std::string cmd_witness(const Json& s, const RunOptions& opt, Sampler& sampler) {
    const Assemblage sigma = make_assemblage(s, sampler);
    const std::size_t d = sigma.dim();
    const CertificationResult cert = certify(sigma, opt.tol);
    Json bounds = Json::array();
    for (std::size_t n = 1; n <= d; ++n)
        bounds.push_back(Json{{"n", n}, {"bound", io::round9(witness_bound(d, n))}});
    Json report = io::to_json(cert);
    report["kind"] = "witness";
    report["d"] = d;
    report["bounds"] = std::move(bounds);
    record_seed(report, sampler);
    return io::dump(report);
}

std::string cmd_thresholds(const Json& s) {
    const std::size_t d = get_size(s, "d");
    const std::string format = s.contains("format") ? get_string(s, "format") : "json";
    if (format == "csv") return io::region_csv(region_table(d));
    if (format != "json") throw ParseError("\"format\" must be \"json\" or \"csv\"");
    Json reports = Json::array();
    if (s.contains("n")) {
        reports.push_back(io::to_json(threshold_report(d, get_size(s, "n"))));
    } else {
        for (std::size_t n = 1; n < d; ++n) reports.push_back(io::to_json(threshold_report(d, n)));
    }
    return io::dump(Json{{"kind", "thresholds"}, {"d", d}, {"reports", std::move(reports)}});
}

std::string cmd_map(const Json& s, Sampler& sampler) {
    Json report{{"kind", "map"}};
    if (s.contains("assemblage") || s.contains("state")) {
        const MeasurementMap map = assemblage_to_measurements(make_assemblage(s, sampler));
        report["direction"] = "assemblage_to_measurements";
        report["full_rank"] = map.full_rank();
        report["marginal"] = io::matrix_to_json(map.marginal.matrix());
        report["support"] = io::matrix_to_json(map.support);
        report["measurements"] = io::to_json(map.measurements);
    } else {
        const MeasurementSet m = make_measurements(require(s, "measurements"), sampler);
        const DensityMatrix marginal =
            s.contains("marginal") ? make_density(s["marginal"]) : DensityMatrix::maximally_mixed(m.dim());
        report["direction"] = "measurements_to_assemblage";
        report["assemblage"] = io::to_json(measurements_to_assemblage(m, marginal));
    }
    record_seed(report, sampler);
    return io::dump(report);
}

std::string cmd_weight(const Json& s, Sampler& sampler) {
    const std::size_t level = get_size(s, "n", 1);
    const std::string target = get_string(s, "target");
    Json report{{"kind", "weight"}, {"target", target}, {"n", level}};
    if (target == "steering") {
        report["result"] = io::to_json(steering_weight(make_assemblage(s, sampler), level));
    } else if (target == "incompatibility") {
        report["result"] =
            io::to_json(incompatibility_weight(make_measurements(require(s, "measurements"), sampler), level));
    } else if (target == "entanglement") {
        report["result"] = io::to_json(entanglement_weight_ppt(make_state(require(s, "state")), level));
    } else if (target == "inequality") {
        if (level != 1) throw UnsupportedError("the weight inequality is only checked at n = 1");
        const WeightInequality w = check_weight_inequality(
            make_measurements(require(s, "measurements"), sampler), make_state(require(s, "state")));
        report["lhs"] = io::round9(w.lhs);
        report["rhs"] = io::round9(w.rhs);
        report["holds"] = w.holds;
        report["steering"] = io::to_json(w.steering);
        report["incompatibility"] = io::to_json(w.incompatibility);
        report["entanglement"] = io::to_json(w.entanglement);
    } else {
        throw ParseError("\"target\" must be steering, incompatibility, entanglement or inequality");
    }
    record_seed(report, sampler);
    return io::dump(report);
}

std::string cmd_channel(const Json& s, const RunOptions& opt) {
    const KrausChannel channel = make_channel(require(s, "channel"));
    const std::size_t n = get_size(s, "n", 1);
    const DensityMatrix sigma = s.contains("marginal") ? make_density(s["marginal"])
                                                       : DensityMatrix::maximally_mixed(channel.dim_in());
    const ChoiState choi = choi_of(channel, sigma);
    const KrausChannel canonical = state_to_channel(choi.bipartite(), sigma);
    Json report{{"kind", "channel"}, {"n", n}};
    report["peb"] = io::to_json(peb_certificate(channel));
    report["peb_from_choi"] = io::to_json(peb_certificate(canonical));
    report["peb_certifies_n"] = peb_certificate(channel).n <= n;
    report["pib"] = io::to_json(pib_witness_check(channel, sigma, n, opt.tol));
    report["choi"] = io::to_json(choi.bipartite());
    return io::dump(report);
}

std::vector<double> sweep_grid(const Json& s) {
    std::vector<double> etas;
    if (s.contains("etas")) {
        const Json& v = s["etas"];
        if (!v.is_array()) throw ParseError("\"etas\" must be an array");
        for (const auto& e : v) {
            if (!e.is_number()) throw ParseError("\"etas\" entries must be numbers");
            etas.push_back(e.get<double>());
        }
        return etas;
    }
    const Json& g = require(s, "grid");
    const double start = get_double(g, "start", 0.0);
    const double stop = get_double(g, "stop", 1.0);
    const double step = get_double(g, "step", 0.05);
    if (!(step > 0.0)) throw ParseError("grid \"step\" must be positive");
    if (stop < start) return etas;
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) etas.push_back(std::min(stop, start + static_cast<double>(k) * step));
    return etas;
}

unsigned thread_cap(unsigned requested) {
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("HDSTEER_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap > 0) n = std::min(n, static_cast<unsigned>(cap));
    }
    return std::max(1u, n);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read scenario file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::string sweep_csv(std::size_t d, const std::vector<double>& etas, double tol, unsigned threads) {
    const std::vector<RegionRow> regions = region_table(d);
    const MeasurementSet mubs = fourier_mub_measurements(d);
    const GhdsWitness witness = ghds_witness(d);
    for (const double eta : etas)
        if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("sweep visibilities must lie in [0, 1]");

    std::vector<std::string> rows(etas.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t k = next++; k < etas.size(); k = next++) {
            const double eta = etas[k];
            const Assemblage sigma = steer(isotropic(d, eta), mubs);
            const CertificationResult cert = certify(sigma, tol);
            std::size_t sn = 1, preparable = d;
            for (const auto& r : regions)
                if (eta > r.iso_sn_threshold) sn = r.n + 1;
            for (auto it = regions.rbegin(); it != regions.rend(); ++it)
                if (eta <= it->pvm_nsim_threshold) preparable = it->n;
            std::ostringstream line;
            line << io::format9(eta) << ',' << io::format9(witness_value(sigma, witness)) << ','
                 << cert.certified_sn << ',' << sn << ',' << preparable << '\n';
            rows[k] = line.str();
        }
    };
    const unsigned n = std::min<unsigned>(thread_cap(threads), static_cast<unsigned>(std::max<std::size_t>(1, etas.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::string out = "eta,witness_value,largest_certified_n,sn_at_least,pvm_n_preparable\n";
    for (const auto& r : rows) out += r;
    return out;
}

std::string run_scenario(const Json& scenario, const RunOptions& options) {
    if (!scenario.is_object()) throw ParseError("scenario must be a JSON object");
    std::uint64_t seed = options.seed;
    if (!options.seed_given && scenario.contains("seed")) {
        if (!scenario["seed"].is_number_unsigned()) throw ParseError("\"seed\" must be an unsigned integer");
        seed = scenario["seed"].get<std::uint64_t>();
    }
    Sampler sampler(seed);
    RunOptions opt = options;
    opt.tol = get_double(scenario, "tol", options.tol);
    const std::string kind = get_string(scenario, "kind");
    if (kind == "witness") return cmd_witness(scenario, opt, sampler);
    if (kind == "thresholds") return cmd_thresholds(scenario);
    if (kind == "map") return cmd_map(scenario, sampler);
    if (kind == "weight") return cmd_weight(scenario, sampler);
    if (kind == "channel") return cmd_channel(scenario, opt);
    if (kind == "sweep") return sweep_csv(get_size(scenario, "d"), sweep_grid(scenario), opt.tol, opt.threads);
    throw ParseError("unknown scenario kind \"" + kind + "\"");
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Steering-dimension certificates from scenario files"};
    std::string scenario_path, out_path;
    RunOptions options;
    double tol = options.tol;
    app.add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    app.add_option("--out", out_path, "Write the report here instead of stdout");
    auto* seed = app.add_option("--seed", options.seed, "Seed for Haar sampling");
    app.add_option("--tol", tol, "Certification tolerance")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kParse;
    }
    options.seed_given = seed->count() > 0;
    options.tol = tol;

    try {
        const Json scenario = Json::parse(read_file(scenario_path));
        RunOptions run_opt = options;
        if (!scenario.is_object() || !scenario.contains("tol")) run_opt.tol = tol;
        const std::string report = run_scenario(scenario, run_opt);
        if (out_path.empty()) {
            out << report;
        } else {
            std::ofstream file(out_path, std::ios::binary);
            if (!file) throw ParseError("cannot write " + out_path);
            file << report;
        }
        return kOk;
    } catch (const Json::exception& e) {
        err << "parse error: " << e.what() << '\n';
        return kParse;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kParse;
    } catch (const SolverError& e) {
        const ConicSolution& s = e.last_iterate();
        err << "solver error: " << e.what() << "\n  status=" << to_string(s.status)
            << " iterations=" << s.iterations << " gap=" << io::format9(s.gap)
            << " primal_residual=" << io::format9(s.primal_residual)
            << " dual_residual=" << io::format9(s.dual_residual) << '\n';
        return kSolver;
    } catch (const Error& e) {
        err << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInternal;
    }
}

}  // namespace hdsteer::cli
