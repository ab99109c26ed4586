// Command-line front end: load equation specs, run criterion checks,
// integrate trajectories, and search for closed solutions. Every verdict
// comes straight from the library; the shell only routes data.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyode/polyode.hpp"

namespace {

using namespace polyode;

constexpr int kExitSatisfied = 0;
constexpr int kExitViolated = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitInputError = 3;

void emit(const nlohmann::json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw SpecError("cannot write " + out_path);
        out << j.dump(2) << "\n";
    }
}

struct CheckArgs {
    std::string input, theorem, out;
    double tol = 1e-8;
    int grid = 2048;
    double strict_eps = 1e-9;
    std::optional<double> gamma, nu, c, c_plus, c_minus, zeta0;
    std::optional<int> j;
};

int run_check(const CheckArgs& args) {
    EquationSpec spec = load_equation_spec_file(args.input);
    auto id = criterion_from_string(args.theorem);
    if (!id) {
        std::cerr << "unknown theorem id '" << args.theorem << "'\n";
        return kExitInputError;
    }
    if (args.gamma) spec.params.gamma = args.gamma;
    if (args.nu) spec.params.nu = args.nu;
    if (args.c) spec.params.c = args.c;
    if (args.c_plus) spec.params.c_plus = args.c_plus;
    if (args.c_minus) spec.params.c_minus = args.c_minus;
    if (args.zeta0) spec.params.zeta0 = args.zeta0;
    if (args.j) spec.params.j = args.j;

    CheckOptions opts;
    opts.tolerance = args.tol;
    opts.grid_points = args.grid;
    opts.strict_eps = args.strict_eps;
    CriterionReport rep = check_theorem(spec.ode, *id, spec.params, opts);
    emit(report_to_json(rep, spec.raw.value("params", nlohmann::json::object())), args.out);
    switch (rep.verdict) {
        case Verdict::Satisfied: return kExitSatisfied;
        case Verdict::Violated: return kExitViolated;
        case Verdict::Inconclusive: return kExitInconclusive;
    }
    return kExitInputError;
}

struct IntegrateArgs {
    std::string input, out;
    double y0 = 0.0;
    double tol = 1e-10;
};

int run_integrate(const IntegrateArgs& args) {
    EquationSpec spec = load_equation_spec_file(args.input);
    Trajectory traj = integrate(spec.ode, spec.ode.t0, args.y0, spec.ode.horizon, args.tol);
    if (!args.out.empty()) {
        std::ofstream out(args.out);
        if (!out) throw SpecError("cannot write " + args.out);
        write_trajectory_csv(out, traj);
    } else {
        write_trajectory_csv(std::cout, traj);
    }
    nlohmann::json status;
    status["schema_version"] = kReportSchemaVersion;
    switch (traj.status) {
        case Trajectory::Status::ReachedEnd: status["status"] = "reached_end"; break;
        case Trajectory::Status::BlowUp:
            status["status"] = "blow_up";
            status["t_escape"] = traj.t_escape;
            break;
        case Trajectory::Status::DomainError:
            status["status"] = "domain_error";
            status["t"] = traj.t_escape;
            break;
    }
    status["samples"] = traj.samples().size();
    std::cerr << status.dump() << "\n";
    return traj.reached_end() ? kExitSatisfied : kExitInconclusive;
}

struct ClosedArgs {
    std::string input, out;
    std::vector<double> bracket, scan;
    int probes = 64;
    double tol = 1e-10;
    bool embed = false;
    bool reflected = false;
};

int run_closed(const ClosedArgs& args) {
    EquationSpec spec = load_equation_spec_file(args.input);
    nlohmann::json j;
    bool found = false;
    if (!args.bracket.empty()) {
        try {
            ClosedSolutionResult r =
                args.reflected
                    ? find_closed_reflected(spec.ode, {args.bracket[0], args.bracket[1]},
                                            args.tol)
                    : find_closed(spec.ode, {args.bracket[0], args.bracket[1]}, args.tol);
            j["schema_version"] = kReportSchemaVersion;
            j["kind"] = "closed-search";
            j["results"] = nlohmann::json::array({closed_result_to_json(r, args.embed)});
            j["continuum_suspected"] = r.note == "continuum suspected";
            j["escaped_probes"] = nlohmann::json::array();
            found = true;
        } catch (const BracketInvalid& e) {
            std::cerr << "bracket invalid: " << e.what() << "\n";
            j["schema_version"] = kReportSchemaVersion;
            j["kind"] = "closed-search";
            j["results"] = nlohmann::json::array();
            j["error"] = e.what();
        } catch (const BlowUpInsideBracket& e) {
            std::cerr << e.what() << "\n";
            j["schema_version"] = kReportSchemaVersion;
            j["kind"] = "closed-search";
            j["results"] = nlohmann::json::array();
            j["error"] = e.what();
        }
    } else {
        std::pair<double, double> range{-1.0, 1.0};
        if (args.scan.size() == 2) range = {args.scan[0], args.scan[1]};
        ScanOutcome out = args.reflected
                              ? scan_closed_reflected(spec.ode, range, args.probes, args.tol)
                              : scan_closed(spec.ode, range, args.probes, args.tol);
        j = scan_to_json(out, args.embed);
        found = !out.results.empty();
    }
    emit(j, args.out);
    return found ? kExitSatisfied : kExitInconclusive;
}

// ---------------------------------------------------------------------------
// fixture corpus

struct FixtureCase {
    std::string name;
    std::string detail;
    bool (*run)(const std::string& dir, std::string& message);
};

bool approx(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

const std::vector<FixtureCase>& corpus();

int run_verify(const std::string& dir, bool list_only) {
    int failures = 0;
    std::printf("%-26s %s\n", "fixture", "expectation");
    for (const auto& c : corpus()) {
        if (list_only) {
            std::printf("%-26s %s\n", c.name.c_str(), c.detail.c_str());
            continue;
        }
        std::string message;
        bool ok = false;
        try {
            ok = c.run(dir, message);
        } catch (const std::exception& e) {
            message = e.what();
        }
        std::printf("%-26s %s %s\n", c.name.c_str(), ok ? "[pass]" : "[FAIL]",
                    message.c_str());
        if (!ok) ++failures;
    }
    if (!list_only)
        std::printf("%d/%zu fixtures passed\n", static_cast<int>(corpus().size()) - failures,
                    corpus().size());
    return failures == 0 ? kExitSatisfied : kExitViolated;
}

const std::vector<FixtureCase>& corpus() {
    static const std::vector<FixtureCase> cases = {
        {"kernel-identity", "u^k - v^k factors through S_k on a sample sweep",
         [](const std::string&, std::string& msg) {
             for (int i = 0; i < 2000; ++i) {
                 const double u = -4.0 + 0.004 * i, v = 3.0 - 0.003 * i;
                 for (int k = 1; k <= 8; ++k) {
                     const double lhs = std::pow(u, k) - std::pow(v, k);
                     const double rhs = (u - v) * s_poly(k, u, v);
                     if (std::fabs(lhs - rhs) > 1e-9 * std::pow(4.0, k)) {
                         msg = "identity residual too large";
                         return false;
                     }
                 }
             }
             return true;
         }},
        {"ex51 / C5.1", "alternating-sign checker satisfied",
         [](const std::string& dir, std::string& msg) {
             EquationSpec s = load_equation_spec_file(dir + "/ex51.json");
             auto rep = check_theorem(s.ode, CriterionId::C5_1, s.params);
             msg = to_string(rep.verdict);
             return rep.verdict == Verdict::Satisfied;
         }},
        {"ex51 / T5.3", "glued-envelope checker verdict pinned (endpoint fails)",
         [](const std::string& dir, std::string& msg) {
             EquationSpec s = load_equation_spec_file(dir + "/ex51.json");
             auto rep = check_theorem(s.ode, CriterionId::T5_3, s.params);
             double m6 = 0.0;
             for (const auto& c : rep.conditions)
                 if (c.label == "6)") m6 = c.margin;
             msg = to_string(rep.verdict) + ", 6) margin " + std::to_string(m6);
             return rep.verdict == Verdict::Violated && approx(m6, -0.1614253, 1e-6);
         }},
        {"ex52 / T5.5", "odd-degree balanced checker satisfied",
         [](const std::string& dir, std::string& msg) {
             EquationSpec s = load_equation_spec_file(dir + "/ex52.json");
             auto rep = check_theorem(s.ode, CriterionId::T5_5, s.params);
             msg = to_string(rep.verdict);
             return rep.verdict == Verdict::Satisfied;
         }},
        {"ex53 / T3.2", "constant comparison pair satisfied",
         [](const std::string& dir, std::string& msg) {
             EquationSpec s = load_equation_spec_file(dir + "/ex53.json");
             auto rep = check_theorem(s.ode, CriterionId::T3_2, s.params);
             msg = to_string(rep.verdict);
             return rep.verdict == Verdict::Satisfied;
         }},
        {"bracket / C3.2", "unit envelopes satisfied",
         [](const std::string& dir, std::string& msg) {
             EquationSpec s = load_equation_spec_file(dir + "/bracket.json");
             auto rep = check_theorem(s.ode, CriterionId::C3_2, s.params);
             msg = to_string(rep.verdict);
             return rep.verdict == Verdict::Satisfied;
         }},
        {"linear_relax / closed", "fixed point at 1",
         [](const std::string& dir, std::string& msg) {
             EquationSpec s = load_equation_spec_file(dir + "/linear_relax.json");
             auto r = find_closed(s.ode, {-3.0, 4.0}, 1e-10);
             msg = "gamma* = " + std::to_string(r.gamma_star);
             return approx(r.gamma_star, 1.0, 1e-8) && r.residual <= 1e-10;
         }},
        {"ex51 / closed pair", "distinct orbits of both signs",
         [](const std::string& dir, std::string& msg) {
             EquationSpec s = load_equation_spec_file(dir + "/ex51.json");
             auto direct = scan_closed(s.ode, {0.0, 3.0}, 48, 1e-10);
             auto refl = scan_closed_reflected(s.ode, {0.0, 3.0}, 48, 1e-10);
             if (direct.results.empty() || refl.results.empty()) {
                 msg = "missing orbit";
                 return false;
             }
             const double gp = direct.results.back().gamma_star;
             const double gm = refl.results.front().gamma_star;
             msg = "gamma+ = " + std::to_string(gp) + ", gamma- = " + std::to_string(gm);
             return approx(gp, 0.165055945728, 1e-8) && approx(gm, -0.914889189514, 1e-7) &&
                    direct.results.back().residual <= 1e-8 &&
                    refl.results.front().residual <= 1e-8;
         }},
        {"ex52 / closed", "orbit inside the glued-envelope bracket",
         [](const std::string& dir, std::string& msg) {
             EquationSpec s = load_equation_spec_file(dir + "/ex52.json");
             auto rep = check_theorem(s.ode, CriterionId::T5_5, s.params);
             if (!rep.bracket) {
                 msg = "no bracket";
                 return false;
             }
             auto r = find_closed(s.ode, *rep.bracket, 1e-10);
             msg = "gamma* = " + std::to_string(r.gamma_star);
             return r.residual <= 1e-8 && approx(r.gamma_star, 0.0, 1e-6);
         }},
        {"ex53 / closed", "orbit inside the unit bracket",
         [](const std::string& dir, std::string& msg) {
             EquationSpec s = load_equation_spec_file(dir + "/ex53.json");
             auto out = scan_closed(s.ode, {-1.0, 1.0}, 32, 1e-10);
             if (out.results.empty()) {
                 msg = "no orbit";
                 return false;
             }
             msg = "gamma* = " + std::to_string(out.results[0].gamma_star);
             return out.results[0].residual <= 1e-8 &&
                    approx(out.results[0].gamma_star, 0.380126429778, 1e-8);
         }},
        {"escape / closed", "all probes escape, empty result",
         [](const std::string& dir, std::string& msg) {
             EquationSpec s = load_equation_spec_file(dir + "/escape.json");
             auto out = scan_closed(s.ode, {-2.0, 2.0}, 16, 1e-10);
             msg = std::to_string(out.escaped_probes.size()) + " escapes";
             return out.results.empty() && out.escaped_probes.size() == 17;
         }},
    };
    return cases;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical toolkit for scalar polynomial first-order differential equations"};
    app.require_subcommand(1);

    CheckArgs check_args;
    auto* check = app.add_subcommand("check", "verify a criterion's hypotheses on a spec");
    check->add_option("--input", check_args.input, "equation spec JSON")->required();
    check->add_option("--theorem", check_args.theorem, "criterion id, e.g. T4.1")->required();
    check->add_option("--out", check_args.out, "report path (default stdout)");
    check->add_option("--tol", check_args.tol, "condition tolerance");
    check->add_option("--grid", check_args.grid, "condition grid points");
    check->add_option("--strict-eps", check_args.strict_eps, "strict inequality epsilon");
    check->add_option_function<double>("--gamma",
                                       [&](double v) { check_args.gamma = v; });
    check->add_option_function<double>("--nu", [&](double v) { check_args.nu = v; });
    check->add_option_function<double>("--c", [&](double v) { check_args.c = v; });
    check->add_option_function<double>("--c-plus", [&](double v) { check_args.c_plus = v; });
    check->add_option_function<double>("--c-minus", [&](double v) { check_args.c_minus = v; });
    check->add_option_function<double>("--zeta0", [&](double v) { check_args.zeta0 = v; });
    check->add_option_function<int>("--j", [&](int v) { check_args.j = v; });

    IntegrateArgs int_args;
    auto* integ = app.add_subcommand("integrate", "integrate one trajectory to CSV");
    integ->add_option("--input", int_args.input, "equation spec JSON")->required();
    integ->add_option("--y0", int_args.y0, "initial value")->required();
    integ->add_option("--tol", int_args.tol, "integration tolerance");
    integ->add_option("--out", int_args.out, "CSV path (default stdout)");

    ClosedArgs closed_args;
    auto* closed = app.add_subcommand("closed", "locate closed solutions");
    closed->add_option("--input", closed_args.input, "equation spec JSON")->required();
    closed->add_option("--bracket", closed_args.bracket, "bracket LO HI")->expected(2);
    closed->add_option("--scan", closed_args.scan, "scan range LO HI")->expected(2);
    closed->add_option("--probes", closed_args.probes, "number of scan probes");
    closed->add_option("--tol", closed_args.tol, "fixed-point residual tolerance");
    closed->add_option("--out", closed_args.out, "report path (default stdout)");
    closed->add_flag("--embed-trajectory", closed_args.embed, "embed samples in the report");
    closed->add_flag("--reflected", closed_args.reflected,
                     "search the reflected equation (nonpositive orbits)");

    std::string fixtures_dir = "fixtures";
    bool list_only = false;
    auto* verify = app.add_subcommand("verify-examples", "run the fixture corpus");
    verify->add_option("--fixtures", fixtures_dir, "fixture directory");
    verify->add_flag("--list", list_only, "list fixtures without running");

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return run_check(check_args);
        if (integ->parsed()) return run_integrate(int_args);
        if (closed->parsed()) return run_closed(closed_args);
        if (verify->parsed()) return run_verify(fixtures_dir, list_only);
    } catch (const SpecError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
