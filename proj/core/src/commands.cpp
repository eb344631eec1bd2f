#include "impvar/commands.hpp"

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "impvar/cutoff.hpp"
#include "impvar/errors.hpp"
#include "impvar/fibering.hpp"
#include "impvar/functional.hpp"
#include "impvar/hypothesis.hpp"
#include "impvar/io.hpp"
#include "impvar/problem_file.hpp"
#include "impvar/solver.hpp"

namespace impvar {

namespace {

using json = nlohmann::ordered_json;

struct Loaded {
    ProblemSpec spec;
    std::string text;
    std::string source;
};

Loaded load(const RunConfig& cfg) {
    Loaded l;
    if (cfg.example4) {
        if (!cfg.problem_path.empty()) throw SpecError("give either a problem file or --example4, not both");
        l.text = example4_text();
        l.spec = example4_spec();
        l.source = "bundled:example4";
    } else {
        if (cfg.problem_path.empty()) throw SpecError("no problem file given (or use --example4)");
        LoadedProblem lp = load_problem_file(cfg.problem_path);
        l.spec = std::move(lp.spec);
        l.text = std::move(lp.text);
        l.source = cfg.problem_path;
    }
    if (cfg.epsilon) l.spec.epsilon = *cfg.epsilon;
    l.spec.validate_structure();
    return l;
}

json problem_json(const Loaded& l) {
    return {{"name", l.spec.name}, {"source", l.source}, {"hash", "fnv1a64:" + fnv1a64_hex(l.text)}};
}

json energy_json(const EnergyBreakdown& e) {
    return {{"total", e.total},       {"quadratic", e.quadratic},       {"beta_term", e.beta_term},
            {"f_term", e.f_term},     {"impulse_term", e.impulse_term}, {"g_term", e.g_term}};
}

std::string two_digits(int i) {
    std::ostringstream os;
    os << std::setw(2) << std::setfill('0') << i;
    return os.str();
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const OutputExists& e) {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const SpecError& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const EvalError& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::invalid_argument& e) {
        err << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitShortfall;
    }
}

}  // namespace

int run_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Loaded l = load(cfg);
        const ValidationReport v = validate_spec(l.spec);
        const AuditReport hyp = audit(l.spec, std::max(cfg.samples, 2000), cfg.seed);
        const WeightProfile w = build_weight_profile(l.spec);
        const ModifiedNonlinearity mn(l.spec, w);
        const AuditReport derived = audit_derived_conditions(mn, l.spec, std::max(cfg.samples, 2000), cfg.seed);
        const bool ok = v.ok() && hyp.overall() && derived.overall();

        std::ostringstream text;
        text << "problem: " << (l.spec.name.empty() ? l.source : l.spec.name) << "\n";
        text << "H0 = " << v.H0 << ", M1 = " << v.M1 << ", A0 = " << mn.A0() << ", A1 = " << mn.A1() << "\n\n";
        text << "hypotheses\n" << hyp.to_text() << "\n";
        text << "cut-off problem\n" << derived.to_text() << "\n";
        text << "check: " << (ok ? "PASS" : "FAIL") << "\n";
        out << text.str();

        if (!cfg.out.empty()) {
            StagedDirectory dir(cfg.out, cfg.force);
            json j;
            j["format_version"] = 1;
            j["command"] = "check";
            j["problem"] = problem_json(l);
            j["samples"] = std::max(cfg.samples, 2000);
            j["rng_seed"] = cfg.seed;
            j["pass"] = ok;
            j["hypotheses"] = json::parse(hyp.to_json());
            j["derived"] = json::parse(derived.to_json());
            dir.write("audit.json", j.dump(2) + "\n");
            dir.write("audit.txt", text.str());
            dir.commit();
        }
        return ok ? kExitOk : kExitShortfall;
    });
}

int run_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (cfg.k < 0) throw std::invalid_argument("--k must be >= 0");
        const Loaded l = load(cfg);
        const ValidationReport v = validate_spec(l.spec);
        if (!v.ok()) throw SpecError("problem violates " + v.items.back().message);
        const Functional J = Functional::make(l.spec, cfg.elements_per_segment);

        SolverOptions opt;
        opt.grad_tol = cfg.grad_tol;
        opt.distinct_tol = cfg.distinct_tol;
        opt.n_directions = std::max(cfg.directions, cfg.k);
        opt.random_directions = cfg.random_directions;
        opt.rng_seed = cfg.seed;
        opt.jobs = cfg.jobs;
        if (cfg.method == "newton") opt.method = DescentMethod::Newton;
        else if (cfg.method == "lbfgs") opt.method = DescentMethod::LBFGS;
        else throw std::invalid_argument("unknown --method '" + cfg.method + "'");

        const SearchResult res = multiplicity_search(J, cfg.k, opt);
        const DiscreteSpace& s = *J.space();

        out << "found " << res.found << " of " << cfg.k << " requested critical points (epsilon = "
            << l.spec.epsilon << ", " << s.n_free() << " dofs)\n";
        out << std::left << std::setw(4) << "#" << std::setw(18) << "energy" << std::setw(14) << "||u||_E"
            << std::setw(14) << "||u||_inf" << std::setw(10) << "accepted" << "origin\n";
        for (std::size_t i = 0; i < res.points.size(); ++i) {
            const auto& p = res.points[i];
            out << std::setw(4) << i + 1 << std::setw(18) << std::setprecision(9) << p.energy.total << std::setw(14)
                << std::setprecision(4) << p.norm_E << std::setw(14) << p.norm_inf << std::setw(10)
                << (p.accepted ? (p.trivial ? "trivial" : "yes") : "no") << p.origin << "\n";
        }

        if (!cfg.out.empty()) {
            StagedDirectory dir(cfg.out, cfg.force);
            json j;
            j["format_version"] = 1;
            j["command"] = "solve";
            j["problem"] = problem_json(l);
            j["config"] = {{"epsilon", l.spec.epsilon},
                           {"k", cfg.k},
                           {"elements_per_segment", cfg.elements_per_segment},
                           {"method", cfg.method},
                           {"directions", opt.n_directions},
                           {"random_directions", opt.random_directions},
                           {"rng_seed", cfg.seed},
                           {"jobs", cfg.jobs}};
            j["tolerances"] = {{"grad_tol", opt.grad_tol},
                               {"distinct_tol", opt.distinct_tol},
                               {"quadrature_rel_tol", 1e-13},
                               {"deflation_power", opt.deflation_power},
                               {"deflation_shift", opt.deflation_shift},
                               {"armijo_c1", opt.armijo_c1},
                               {"hessian_tau", opt.hessian_tau}};
            j["mesh"] = {{"nodes", s.nodes().size()}, {"elements", s.elements().size()}, {"free_dofs", s.n_free()}};
            j["weights"] = {{"H0", J.H0()}, {"M1", J.M1()}, {"e_star", J.e_star()}};
            j["result"] = {{"requested", res.requested},
                           {"found", res.found},
                           {"shortfall", res.shortfall},
                           {"pairs_complete", l.spec.epsilon == 0.0 ? json(res.pairs_complete(s)) : json(nullptr)},
                           {"seeds_tried", res.seeds_tried}};
            json sols = json::array();
            for (std::size_t i = 0; i < res.points.size(); ++i) {
                const auto& p = res.points[i];
                const std::string file = "solution_" + two_digits(static_cast<int>(i) + 1) + ".csv";
                std::ostringstream csv;
                write_dense_csv(csv, p.field, 16);
                dir.write(file, csv.str());
                sols.push_back({{"id", i + 1},
                                {"file", file},
                                {"origin", p.origin},
                                {"energy", energy_json(p.energy)},
                                {"grad_norm", p.grad_norm},
                                {"norm_E", p.norm_E},
                                {"norm_inf", p.norm_inf},
                                {"accepted", p.accepted},
                                {"trivial", p.trivial},
                                {"small_norm", p.small_norm},
                                {"iterations", p.iterations}});
            }
            j["solutions"] = sols;
            // Fibering scans along the first few seed directions.
            json fibers = json::array();
            std::vector<std::string> seed_log;
            SolverOptions sopt = opt;
            sopt.random_directions = 0;
            const auto seeds = seed_starts(J, sopt, false, &seed_log);
            for (const auto& sd : seeds) {
                if (sd.index > std::min(opt.n_directions, 4)) break;
                const FiberScan sc = scan_fiber(J, sd.start, 64);
                const std::string file = "fiber_mode_" + two_digits(sd.index) + ".csv";
                std::ostringstream csv;
                write_fiber_csv(csv, sc);
                dir.write(file, csv.str());
                fibers.push_back({{"seed", sd.label}, {"file", file}, {"c_root_unit", sd.c_u}});
            }
            j["fibers"] = fibers;
            j["log"] = res.log;
            dir.write("manifest.json", j.dump(2) + "\n");
            dir.commit();
        }
        return res.shortfall ? kExitShortfall : kExitOk;
    });
}

int run_fiber(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (cfg.direction < 1) throw std::invalid_argument("--direction must be >= 1");
        const Loaded l = load(cfg);
        const Functional J = Functional::make(l.spec, cfg.elements_per_segment);
        SolverOptions opt;
        opt.n_directions = cfg.direction;
        std::vector<std::string> log;
        const auto seeds = seed_starts(J, opt, false, &log);
        if (seeds.empty() || seeds.back().index != cfg.direction)
            throw FiberingError("no fibering root along mode " + std::to_string(cfg.direction));
        const FiberCertificate cert = certify_fiber(J, seeds.back().start, cfg.grid);
        std::ostringstream csv;
        write_fiber_csv(csv, cert.scan);
        if (cfg.out.empty()) {
            out << csv.str();
        } else {
            StagedDirectory dir(cfg.out, cfg.force);
            dir.write("fiber.csv", csv.str());
            json j;
            j["format_version"] = 1;
            j["command"] = "fiber";
            j["problem"] = problem_json(l);
            j["direction"] = cfg.direction;
            j["root"] = {{"c", cert.scan.root.c}, {"residual", cert.scan.root.residual}, {"P", cert.scan.root.P}};
            j["certificate"] = {{"pass", cert.pass()},
                                {"increasing", cert.increasing},
                                {"single_sign_change", cert.single_sign_change},
                                {"dP_positive", cert.dP_positive},
                                {"dQ_nonnegative", cert.dQ_nonnegative}};
            dir.write("manifest.json", j.dump(2) + "\n");
            dir.commit();
            out << "c(u) = " << std::setprecision(12) << cert.scan.root.c << ", residual "
                << cert.scan.root.residual << ", certificate " << (cert.pass() ? "PASS" : "FAIL") << "\n";
        }
        return cert.pass() ? kExitOk : kExitShortfall;
    });
}

int run_norms(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (cfg.trials < 1) throw std::invalid_argument("--trials must be >= 1");
        const Loaded l = load(cfg);
        const WeightProfile w = build_weight_profile(l.spec);
        const SpacePtr space = DiscreteSpace::build(l.spec.partition, cfg.elements_per_segment, w);
        const EmbeddingReport rep = check_embeddings(space, cfg.trials, cfg.seed);
        out << rep.to_text();
        return rep.overall() ? kExitOk : kExitShortfall;
    });
}

int run_example4(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (cfg.out.empty()) out << example4_text();
        else write_file(cfg.out, example4_text(), cfg.force);
        return kExitOk;
    });
}

}  // namespace impvar
