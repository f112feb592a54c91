#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "porofem/analysis.hpp"
#include "porofem/benchmarks.hpp"
#include "porofem/error.hpp"
#include "porofem/io.hpp"
#include "porofem/problem.hpp"
#include "porofem/solver.hpp"

namespace porofem::cli {

enum ExitCode : int { ok = 0, failure = 1, invalid_arguments = 2, solver_failure = 3, threshold_failure = 4 };

/// Shared options of all subcommands. Unset optionals take the
/// subcommand's default.
struct RunConfig {
    std::vector<int> resolutions;
    std::vector<double> deltas;
    std::optional<double> dt;
    std::optional<double> T;
    std::string out = "out";
    int vtk_every = 0;  ///< 0 writes only the final state where applicable
    std::optional<double> threshold;

    void validate() const
    {
        for (int n : resolutions)
            if (n < 1) throw InvalidArgument("resolution must be >= 1, got " + std::to_string(n));
        for (double d : deltas)
            if (!(d >= 0.0)) throw InvalidArgument("delta must be non-negative");
        if (dt && !(*dt > 0.0)) throw InvalidArgument("dt must be positive");
        if (T && !(*T > 0.0)) throw InvalidArgument("T must be positive");
        if (vtk_every < 0) throw InvalidArgument("vtk-every must be >= 0");
    }
};

namespace detail {

inline std::string fmt(double v) { return porofem::detail::format_double(v); }

inline std::string tag(double v)
{
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

inline std::string path_in(const std::string& dir, const std::string& file)
{
    return (std::filesystem::path(dir) / file).string();
}

inline StepObserver vtk_observer(const Mesh& mesh, const std::string& dir, const std::string& stem, int every)
{
    if (every <= 0) return {};
    return [&mesh, dir, stem, every](int n, double, const State& s) {
        if (n % every == 0) {
            std::ostringstream name;
            name << stem << '_' << std::setw(5) << std::setfill('0') << n << ".vtk";
            write_vtk(mesh, s, path_in(dir, name.str()));
        }
    };
}

}  // namespace detail

/// Manufactured-solution convergence study, one CSV per δ. Returns
/// threshold_failure when any rate falls below the threshold.
inline int cmd_converge(int dim, RunConfig cfg, std::ostream& log)
{
    cfg.validate();
    if (cfg.resolutions.empty()) cfg.resolutions = dim == 2 ? std::vector<int>{8, 16, 32, 64} : std::vector<int>{4, 8, 16};
    if (cfg.deltas.empty()) cfg.deltas = dim == 2 ? std::vector<double>{1.0, 10.0, 100.0} : std::vector<double>{0.001, 0.01, 0.1};
    if (cfg.resolutions.size() < 2) throw InvalidArgument("a convergence study needs at least two resolutions");
    const double threshold = cfg.threshold.value_or(dim == 2 ? 0.9 : 0.8);
    const double T = cfg.T.value_or(0.25);
    std::sort(cfg.resolutions.begin(), cfg.resolutions.end());

    bool all_ok = true;
    for (double delta : cfg.deltas) {
        ConvergenceTable table;
        for (int n : cfg.resolutions) {
            ProblemDefinition p = manufactured_problem(dim, n, delta, cfg.dt.value_or(0.25 / n), T);
            const std::string stem = "converge" + std::to_string(dim) + "d_delta" + detail::tag(delta) + "_n" + std::to_string(n);
            ManufacturedRun run;
            try {
                run = run_with_errors(p, detail::vtk_observer(p.mesh, cfg.out, stem, cfg.vtk_every));
            } catch (const SolverError& e) {
                throw SolverError(std::string("n=") + std::to_string(n) + " delta=" + detail::tag(delta) + ": " + e.what(),
                                  e.step());
            }
            table.rows.push_back(convergence_row(1.0 / n, run.report, run.oscillation));
            log << "dim=" << dim << " delta=" << detail::tag(delta) << " n=" << n << " u_H1=" << detail::fmt(run.report.linf_u_H1)
                << " z_L2=" << detail::fmt(run.report.l2_z_L2) << " z_div=" << detail::fmt(run.report.l2_z_div)
                << " p_L2=" << detail::fmt(run.report.linf_p_L2) << " osc=" << detail::fmt(run.oscillation) << '\n';
        }
        const CsvTable csv = convergence_csv(table);
        const std::string path =
            detail::path_in(cfg.out, "converge" + std::to_string(dim) + "d_delta" + detail::tag(delta) + ".csv");
        write_csv(csv, path);
        for (const auto& r : convergence_rates(table))
            for (double rate : r)
                if (!(rate >= threshold)) all_ok = false;
        log << "wrote " << path << '\n';
    }
    if (!all_ok) {
        log << "some convergence rate is below " << threshold << '\n';
        return threshold_failure;
    }
    return ok;
}

/// Cantilever bracket for each δ: final pressure VTK and a report of the
/// oscillation indicator. Returns threshold_failure when a stabilised run
/// is not below threshold × the δ = 0 indicator.
inline int cmd_cantilever(RunConfig cfg, std::ostream& log)
{
    cfg.validate();
    if (cfg.deltas.empty()) cfg.deltas = {0.0, 5e-6};
    CantileverOptions base;
    if (!cfg.resolutions.empty()) base.n = cfg.resolutions.front();
    if (cfg.dt) base.dt = *cfg.dt;
    if (cfg.T) base.T = *cfg.T;
    const double threshold = cfg.threshold.value_or(0.1);

    CsvTable report;
    report.header = {"delta", "t", "oscillation"};
    std::optional<double> unstabilised;
    std::vector<std::pair<double, double>> stabilised;
    for (double delta : cfg.deltas) {
        CantileverOptions o = base;
        o.delta = delta;
        const ProblemDefinition p = cantilever_setup(o);
        const std::string stem = "cantilever_delta" + detail::tag(delta);
        const CantileverResult r = run_cantilever(p, detail::vtk_observer(p.mesh, cfg.out, stem, cfg.vtk_every));
        write_vtk(p.mesh, r.final_state, detail::path_in(cfg.out, stem + ".vtk"));
        report.rows.push_back({detail::fmt(delta), detail::fmt(r.final_state.t), detail::fmt(r.oscillation)});
        log << "cantilever delta=" << detail::tag(delta) << " t=" << detail::fmt(r.final_state.t)
            << " oscillation=" << detail::fmt(r.oscillation) << '\n';
        if (delta == 0.0)
            unstabilised = r.oscillation;
        else
            stabilised.emplace_back(delta, r.oscillation);
    }
    write_csv(report, detail::path_in(cfg.out, "cantilever_report.csv"));
    if (unstabilised) {
        for (const auto& [delta, osc] : stabilised) {
            if (!(osc <= threshold * *unstabilised)) {
                log << "delta=" << detail::tag(delta) << " does not reduce oscillations below " << threshold
                    << " x the unstabilised value\n";
                return threshold_failure;
            }
        }
    }
    return ok;
}

/// Unconfined compression for each δ against the Armstrong series: one
/// curve CSV (t, t/t_g, analytic, one column per δ) and an RMSE report.
/// Returns threshold_failure when the RMSE of the smallest δ exceeds the
/// threshold.
inline int cmd_unconfined(RunConfig cfg, std::ostream& log)
{
    cfg.validate();
    if (cfg.deltas.empty()) cfg.deltas = {0.001, 0.1, 1.0};
    UnconfinedOptions base;
    if (!cfg.resolutions.empty()) base.n_radial = base.n_axial = cfg.resolutions.front();
    if (cfg.dt) base.dt = *cfg.dt;
    if (cfg.T) base.T = *cfg.T;
    const double threshold = cfg.threshold.value_or(2e-3);

    std::vector<UnconfinedResult> results;
    CsvTable report;
    report.header = {"delta", "rmse", "rmse_over_eps0", "u_first", "u_final"};
    for (double delta : cfg.deltas) {
        UnconfinedOptions o = base;
        o.delta = delta;
        const std::string stem = "unconfined_delta" + detail::tag(delta);
        const ProblemDefinition vtk_mesh = cfg.vtk_every > 0 ? unconfined_setup(o) : ProblemDefinition{};
        UnconfinedResult r = run_unconfined(o, detail::vtk_observer(vtk_mesh.mesh, cfg.out, stem, cfg.vtk_every));
        report.rows.push_back({detail::fmt(delta), detail::fmt(r.rmse), detail::fmt(r.normalized_rmse()),
                               detail::fmt(r.simulated.front()), detail::fmt(r.simulated.back())});
        log << "unconfined delta=" << detail::tag(delta) << " rmse=" << detail::fmt(r.rmse)
            << " first=" << detail::fmt(r.simulated.front()) << " final=" << detail::fmt(r.simulated.back()) << '\n';
        results.push_back(std::move(r));
    }
    CsvTable curves;
    curves.header = {"t", "t_over_tg", "armstrong"};
    for (double delta : cfg.deltas) curves.header.push_back("sim_delta" + detail::tag(delta));
    const UnconfinedResult& first = results.front();
    for (std::size_t i = 0; i < first.t.size(); ++i) {
        std::vector<std::string> row{detail::fmt(first.t[i]), detail::fmt(first.t[i] / first.t_g), detail::fmt(first.analytic[i])};
        for (const auto& r : results) row.push_back(detail::fmt(r.simulated[i]));
        curves.rows.push_back(std::move(row));
    }
    write_csv(curves, detail::path_in(cfg.out, "unconfined_curves.csv"));
    write_csv(report, detail::path_in(cfg.out, "unconfined_rmse.csv"));

    const auto smallest = std::min_element(cfg.deltas.begin(), cfg.deltas.end()) - cfg.deltas.begin();
    if (!(results[static_cast<std::size_t>(smallest)].rmse <= threshold)) {
        log << "rmse exceeds " << threshold << '\n';
        return threshold_failure;
    }
    return ok;
}

/// Armstrong reference curve (t, t/t_g, u/a) for the unconfined parameters.
inline int cmd_armstrong(RunConfig cfg, std::ostream& log)
{
    cfg.validate();
    const UnconfinedOptions o;
    const double dt = cfg.dt.value_or(o.dt);
    const double T = cfg.T.value_or(o.T);
    const ArmstrongModel m = ArmstrongModel::make(o.nu, o.E, o.kappa, o.radius, o.eps0, 200);
    CsvTable csv;
    csv.header = {"t", "t_over_tg", "u_over_a"};
    const int n = static_cast<int>(std::llround(T / dt));
    for (int i = 0; i <= n; ++i) {
        const double t = i * dt;
        csv.rows.push_back({detail::fmt(t), detail::fmt(t / m.t_g()), detail::fmt(armstrong_radial_displacement(t, m).value)});
    }
    const std::string path = detail::path_in(cfg.out, "armstrong.csv");
    write_csv(csv, path);
    log << "wrote " << path << '\n';
    return ok;
}

// ---------------------------------------------------------------------------
// Config-driven runs.
//
//   [problem]   benchmark = manufactured_2d | manufactured_3d | cantilever | unconfined
//               or mesh = <file>; resolution = <n> (benchmarks only)
//   [material]  E, nu | lambda, mu_s; kappa; alpha; c0; delta;
//               operator = full_biot | vector_laplacian
//   [time]      dt, T
//   [source]    f = <vector>, b = <vector>, g = <value>
//   [bc.<tag>]  displacement = <vector> | traction = <vector>;
//               components = <0/1 per axis> (displacement only);
//               pressure = <value> | flux = <value>
//   [output]    dir, vtk_every
//
// Boundary data in config files are constants.

namespace detail {

inline Vec3 vector_value(const Config& c, const std::string& sec, const std::string& key, int dim)
{
    const auto v = c.numbers(sec, key);
    if (static_cast<int>(v.size()) != dim)
        throw ParseError("[" + sec + "] " + key + ": expected " + std::to_string(dim) + " components", c.line_of(sec, key));
    Vec3 out = Vec3::Zero();
    for (int k = 0; k < dim; ++k) out[k] = v[static_cast<std::size_t>(k)];
    return out;
}

inline void apply_material(const Config& c, ProblemDefinition& p)
{
    const std::string s = "material";
    if (!c.has_section(s)) return;
    const int d = p.mesh.dim();
    if (c.has(s, "E") || c.has(s, "nu")) {
        const auto m = MaterialParams::from_young_poisson(c.number(s, "E"), c.number(s, "nu"));
        p.params.lambda = m.lambda;
        p.params.mu_s = m.mu_s;
    }
    p.params.lambda = c.number_or(s, "lambda", p.params.lambda);
    p.params.mu_s = c.number_or(s, "mu_s", p.params.mu_s);
    if (c.has(s, "kappa")) {
        const auto k = c.numbers(s, "kappa");
        if (k.size() == 1) {
            p.params.set_scalar_kappa(k[0]);
        } else if (static_cast<int>(k.size()) == d * d) {
            p.params.kappa = Mat3::Identity();
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) p.params.kappa(i, j) = k[static_cast<std::size_t>(i * d + j)];
        } else {
            throw ParseError("[material] kappa: expected 1 or dim*dim values", c.line_of(s, "kappa"));
        }
    }
    p.params.alpha = c.number_or(s, "alpha", p.params.alpha);
    p.params.c0 = c.number_or(s, "c0", p.params.c0);
    p.params.delta = c.number_or(s, "delta", p.params.delta);
    if (c.has(s, "operator")) {
        const std::string op = c.string(s, "operator");
        if (op == "full_biot")
            p.params.operator_mode = OperatorMode::full_biot;
        else if (op == "vector_laplacian")
            p.params.operator_mode = OperatorMode::vector_laplacian;
        else
            throw ParseError("[material] operator: unknown mode '" + op + "'", c.line_of(s, "operator"));
    }
    p.params.validate(d);
}

inline std::vector<BoundaryAssignment> boundary_from_config(const Config& c, const Mesh& mesh)
{
    std::vector<BoundaryAssignment> out;
    const int d = mesh.dim();
    for (const std::string& sec : c.sections()) {
        if (sec.rfind("bc.", 0) != 0) continue;
        int tag = 0;
        try {
            tag = std::stoi(sec.substr(3));
        } catch (const std::exception&) {
            throw InvalidArgument("section [" + sec + "]: marker must be an integer");
        }
        BoundaryAssignment b;
        b.marker = tag;
        const bool has_disp = c.has(sec, "displacement");
        const bool has_trac = c.has(sec, "traction");
        if (has_disp == has_trac) throw InvalidArgument("[" + sec + "] needs exactly one of displacement, traction");
        if (has_disp) {
            std::array<bool, 3> comps{true, true, true};
            if (c.has(sec, "components")) {
                const auto m = c.numbers(sec, "components");
                if (static_cast<int>(m.size()) != d)
                    throw ParseError("[" + sec + "] components: expected one flag per axis", c.line_of(sec, "components"));
                for (int k = 0; k < d; ++k) comps[static_cast<std::size_t>(k)] = m[static_cast<std::size_t>(k)] != 0.0;
            }
            b.mixture = MixtureCondition::displacement(VectorField::constant(vector_value(c, sec, "displacement", d)), comps);
        } else {
            b.mixture = MixtureCondition::traction(VectorField::constant(vector_value(c, sec, "traction", d)));
        }
        const bool has_p = c.has(sec, "pressure");
        const bool has_q = c.has(sec, "flux");
        if (has_p == has_q) throw InvalidArgument("[" + sec + "] needs exactly one of pressure, flux");
        if (has_p) {
            b.fluid = FluidCondition::pressure_bc(ScalarField::constant(c.number(sec, "pressure")));
        } else {
            const double q = c.number(sec, "flux");
            b.fluid = FluidCondition::flux_bc([q](const Point&, const Vec3&, double) { return q; });
        }
        out.push_back(std::move(b));
    }
    return out;
}

}  // namespace detail

/// Build a problem from a config file (see the grammar above).
[[nodiscard]] inline ProblemDefinition problem_from_config(const Config& c, const std::string& base_dir = ".")
{
    ProblemDefinition p;
    const bool has_bench = c.has("problem", "benchmark");
    const bool has_mesh = c.has("problem", "mesh");
    if (has_bench == has_mesh) throw InvalidArgument("[problem] needs exactly one of benchmark, mesh");
    if (has_bench) {
        const std::string name = c.string("problem", "benchmark");
        const auto res = static_cast<int>(c.number_or("problem", "resolution", 0));
        if (name == "manufactured_2d") {
            p = manufactured_2d(res > 0 ? res : 8);
        } else if (name == "manufactured_3d") {
            p = manufactured_3d(res > 0 ? res : 4);
        } else if (name == "cantilever") {
            CantileverOptions o;
            if (res > 0) o.n = res;
            p = cantilever_setup(o);
        } else if (name == "unconfined") {
            UnconfinedOptions o;
            if (res > 0) o.n_radial = o.n_axial = res;
            p = unconfined_setup(o);
        } else {
            throw ParseError("[problem] benchmark: unknown name '" + name + "'", c.line_of("problem", "benchmark"));
        }
    } else {
        std::filesystem::path mp = c.string("problem", "mesh");
        if (mp.is_relative()) mp = std::filesystem::path(base_dir) / mp;
        p.name = mp.stem().string();
        p.mesh = read_mesh(mp.string());
        p.boundary = detail::boundary_from_config(c, p.mesh);
        p.pressure_mean_constraint = needs_mean_constraint(p.boundary);
    }
    detail::apply_material(c, p);
    const int d = p.mesh.dim();
    if (c.has("source", "f")) p.f = VectorField::constant(detail::vector_value(c, "source", "f", d));
    if (c.has("source", "b")) p.b = VectorField::constant(detail::vector_value(c, "source", "b", d));
    if (c.has("source", "g")) p.g = ScalarField::constant(c.number("source", "g"));
    p.dt = c.number_or("time", "dt", p.dt);
    p.T = c.number_or("time", "T", p.T);
    validate_boundary_partition(p);
    (void)p.num_steps();
    return p;
}

/// Run a config file: VTK snapshots every `vtk_every` steps plus the final
/// state, and a per-step summary CSV (energy, and errors when exact fields
/// are known).
inline int cmd_run(const std::string& config_path, RunConfig cfg, std::ostream& log)
{
    const Config c = Config::parse_file(config_path);
    ProblemDefinition p = problem_from_config(c, std::filesystem::path(config_path).parent_path().string());
    if (cfg.dt) p.dt = *cfg.dt;
    if (cfg.T) p.T = *cfg.T;
    if (!cfg.deltas.empty()) p.params.delta = cfg.deltas.front();
    if (c.has("output", "dir") && cfg.out == "out") cfg.out = c.string("output", "dir");
    if (c.has("output", "vtk_every") && cfg.vtk_every == 0) cfg.vtk_every = static_cast<int>(c.number("output", "vtk_every"));
    cfg.validate();
    (void)p.num_steps();

    const SystemMatrices mats = assemble_system(p.mesh, p.params);
    CsvTable summary;
    summary.header = {"step", "t", "energy", "osc"};
    if (p.exact) {
        for (const char* h : {"err_u_H1", "err_z_L2", "err_z_div", "err_p_L2"}) summary.header.emplace_back(h);
    }
    const auto vtk = detail::vtk_observer(p.mesh, cfg.out, p.name, cfg.vtk_every);
    const auto observer = [&](int n, double t, const State& s) {
        std::vector<std::string> row{std::to_string(n), detail::fmt(t), detail::fmt(discrete_energy(mats, s)),
                                     detail::fmt(oscillation_indicator(s.p, p.mesh))};
        if (p.exact) {
            const StepErrors e = error_norms(p.mesh, s, *p.exact, t, p.params.delta);
            for (double v : {e.u_H1, e.z_L2, e.z_div, e.p_L2}) row.push_back(detail::fmt(v));
        }
        summary.rows.push_back(std::move(row));
        if (vtk) vtk(n, t, s);
    };
    const Trajectory traj = backward_euler_run(p, observer, false);
    write_vtk(p.mesh, traj.back(), detail::path_in(cfg.out, p.name + "_final.vtk"));
    write_csv(summary, detail::path_in(cfg.out, p.name + "_summary.csv"));
    log << "ran " << p.name << ": " << p.num_steps() << " steps, final t=" << detail::fmt(traj.back().t) << '\n';
    return ok;
}

/// Map an exception thrown by a command to its exit code.
[[nodiscard]] inline int exit_code_for(const std::exception& e) noexcept
{
    if (dynamic_cast<const SolverError*>(&e) || dynamic_cast<const SingularSystem*>(&e)) return solver_failure;
    if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const DegenerateCell*>(&e) ||
        dynamic_cast<const TopologyError*>(&e))
        return invalid_arguments;
    return failure;
}

}  // namespace porofem::cli
