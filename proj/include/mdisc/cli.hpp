// Copyright 2026 The mdisc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Command dispatch for the mdisc tool. Every command writes one JSON report
// to `out`; diagnostics go to `err`.

#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdisc/distance.hpp"
#include "mdisc/general_schemes.hpp"
#include "mdisc/io.hpp"
#include "mdisc/qubit_schemes.hpp"
#include "mdisc/simulator.hpp"

namespace mdisc::cli {

using io::Json;

enum ExitCode : int { kOk = 0, kError = 1, kInvalid = 2, kNoScheme = 3 };

/// Raised when the requested scheme family does not apply to the inputs.
struct NoScheme : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string fnv1a(const std::vector<std::string> &chunks) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto &c : chunks) {
        for (unsigned char ch : c) {
            h = (h ^ ch) * 0x100000001b3ULL;
        }
        h = (h ^ 0xffu) * 0x100000001b3ULL;  // chunk boundary
    }
    std::ostringstream os;
    os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

inline Json tolerances_json(const Tolerances &t) {
    return {{"profile", std::string(t.profile_name())},
            {"norm", t.norm},
            {"proj", t.proj},
            {"sing", t.sing},
            {"eig", t.eig},
            {"num", t.num},
            {"angle", t.angle},
            {"overlap_one", t.overlap_one}};
}

namespace detail {

struct Context {
    std::vector<std::string> argv;
    std::vector<std::string> inputs;  // raw bytes of every file read
    Tolerances tol;
    Json seed = nullptr;
    Json results = Json::object();

    ProjectiveMeasurement load_apparatus(const std::string &path) {
        inputs.push_back(io::read_file(path));
        return io::parse_apparatus(inputs.back(), tol);
    }
};

inline Json scheme_summary(const Scheme &s) {
    Json out;
    out["kind"] = std::string(scheme_kind(s));
    out["uses_per_trial"] = uses_per_trial(s);
    std::visit(
        [&](const auto &x) {
            using T = std::decay_t<decltype(x)>;
            out["probe_dim"] = x.probe.size();
            if constexpr (std::is_same_v<T, MMScheme>) {
                out["ancilla_dim"] = x.ancilla_dim;
            }
            if constexpr (std::is_same_v<T, MUMScheme>) {
                out["copies"] = x.copies;
            }
        },
        s);
    out["exact_accuracy_given_m"] = exact_accuracy(s, Hypothesis::M);
    out["exact_accuracy_given_n"] = exact_accuracy(s, Hypothesis::N);
    return out;
}

/// Simple scheme for a physical qubit pair: closed forms first, then the
/// principal-submatrix search.
inline std::optional<SimpleScheme> qubit_simple(const VonNeumannMeasurement &s, const VonNeumannMeasurement &t,
                                                int n_max, int max_subset, const Tolerances &tol) {
    const auto frame = mdisc::detail::qubit_frame(s, t, tol);
    if (auto cf = closed_form_simple_probe(frame.pair, kMaxDenseQubits, tol)) {
        return build_simple_scheme(s, t, cf->first, cf->second, tol);
    }
    for (int n = 1; n <= std::min(n_max, kMaxSearchQubits); ++n) {
        if (auto subset = search_simple_submatrix(frame.pair, n, max_subset, tol)) {
            const Vector xi = simple_state_from_subset(frame.pair, n, *subset);
            return build_simple_scheme(s, t, n, xi, tol);
        }
    }
    return std::nullopt;
}

inline Scheme plan(const ProjectiveMeasurement &m, const ProjectiveMeasurement &n, const std::string &mode,
                   int n_max, int max_subset, Context &ctx) {
    const auto &tol = ctx.tol;
    const auto hyp = make_hypotheses(m, n);
    if (identical(hyp.m, hyp.n, tol)) {
        throw NoScheme("the two measurements are identical");
    }
    const auto vm = as_von_neumann(hyp.m);
    const auto vn = as_von_neumann(hyp.n);
    const bool qubit = hyp.m.dim == 2 && vm && vn;
    if (qubit) {
        const auto frame = mdisc::detail::qubit_frame(*vm, *vn, tol);
        ctx.results["qubit_pair"] = {{"theta", frame.pair.theta}, {"phi", frame.pair.phi}};
    }
    if (mode == "simple" || mode == "auto") {
        if (qubit) {
            if (auto s = qubit_simple(*vm, *vn, n_max, max_subset, tol)) {
                return *s;
            }
        }
        if (mode == "simple") {
            throw NoScheme(qubit ? "no simple scheme found within the search limits"
                                 : "simple schemes are only constructed for qubit von Neumann pairs");
        }
    }
    if (mode == "mm" || mode == "auto") {
        if (qubit) {
            const auto frame = mdisc::detail::qubit_frame(*vm, *vn, tol);
            if (frame.pair.theta < std::numbers::pi - tol.angle &&
                mm_optimal_uses(frame.pair.theta) <= kMaxDenseQubits) {
                return build_mm_optimal(*vm, *vn, tol);
            }
        }
        if (mode == "mm") {
            throw NoScheme(qubit ? "theta outside the range handled by the dense M-M construction"
                                 : "M-M schemes are only constructed for qubit von Neumann pairs");
        }
    }
    const auto general = plan_general(hyp.m, hyp.n, tol);
    ctx.results["general_plan"] = std::string(plan_kind(general));
    return executable(general);
}

inline Json distance_json(const DistanceReport &r) {
    Json out{{"measure", r.measure}, {"value", r.value}, {"certified", r.certified}};
    out["cross_check"] = r.cross_check ? Json(*r.cross_check) : Json(nullptr);
    out["witness"] = io::to_json(r.witness);
    return out;
}

inline Json report(const Context &ctx) {
    Json out;
    out["command"] = ctx.argv;
    out["inputs_digest"] = fnv1a(ctx.inputs);
    out["results"] = ctx.results;
    out["tolerances"] = tolerances_json(ctx.tol);
    out["seed"] = ctx.seed;
    return out;
}

}  // namespace detail

/// Runs one command. `args` excludes the program name.
inline int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Identify which of two known projective measurements an unknown apparatus is"};
    app.require_subcommand(1);
    detail::Context ctx;
    ctx.argv = args;
    ctx.tol = Tolerances::from_environment();

    std::string file_a, file_b, mode = "auto", out_path, measure, prefix;
    std::uint64_t trials = 10000, seed = 0;
    std::uint64_t dist_seed = DistanceOptions{}.seed;
    unsigned workers = 1;
    double theta = 0.0, phi = 0.0;
    int n = 2, n_max = 4, max_subset = 4;

    auto *validate_cmd = app.add_subcommand("validate", "Check an apparatus file");
    validate_cmd->add_option("file", file_a)->required();

    auto *corr_cmd = app.add_subcommand("correlation", "Correlation unitary and overlaps of two apparatus");
    corr_cmd->add_option("m", file_a)->required();
    corr_cmd->add_option("n", file_b)->required();

    auto *plan_cmd = app.add_subcommand("plan", "Build an identification scheme");
    plan_cmd->add_option("m", file_a)->required();
    plan_cmd->add_option("n", file_b)->required();
    plan_cmd->add_option("--scheme", mode)->check(CLI::IsMember({"auto", "simple", "mm", "mum"}));
    plan_cmd->add_option("--out", out_path);
    plan_cmd->add_option("--n-max", n_max, "largest n for the submatrix search")->check(CLI::Range(1, kMaxSearchQubits));
    plan_cmd->add_option("--max-subset", max_subset)->check(CLI::Range(1, 64));

    auto *sim_cmd = app.add_subcommand("simulate", "Run a scheme file against both hypotheses");
    sim_cmd->add_option("scheme", file_a)->required();
    sim_cmd->add_option("--trials", trials)->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", seed);
    sim_cmd->add_option("--workers", workers)->check(CLI::Range(1u, 256u));

    auto *dist_cmd = app.add_subcommand("distance", "Distance or fidelity between two apparatus");
    dist_cmd->add_option("m", file_a)->required();
    dist_cmd->add_option("n", file_b)->required();
    dist_cmd->add_option("--measure", measure)->required()->check(CLI::IsMember({"dmax", "dstab", "fmin", "fstab"}));
    dist_cmd->add_option("--seed", dist_seed, "optimizer seed");

    auto *qubit_cmd = app.add_subcommand("qubit", "Write canonical qubit observables S and T");
    qubit_cmd->add_option("--theta", theta)->required();
    qubit_cmd->add_option("--phi", phi);
    qubit_cmd->add_option("--out-prefix", prefix)->required();

    auto *search_cmd = app.add_subcommand("search-simple", "Search for a singular principal submatrix");
    search_cmd->add_option("--theta", theta)->required();
    search_cmd->add_option("--n", n)->required()->check(CLI::Range(1, kMaxSearchQubits));
    search_cmd->add_option("--max-subset", max_subset)->check(CLI::Range(1, 64));

    std::vector<std::string> full{"mdisc"};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char *> argv;
    for (const auto &a : full) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kError;
    }

    int code = kOk;
    try {
        if (*validate_cmd) {
            ctx.inputs.push_back(io::read_file(file_a));
            io::ApparatusMeta meta;
            const auto doc = io::parse_json(ctx.inputs.back());
            io::detail::check_version(doc);
            const auto m = io::apparatus_from_json(doc, "$", &meta);
            const auto rep = validate(m, ctx.tol);
            Json violations = Json::array();
            for (const auto &v : rep.violations) {
                violations.push_back({{"kind", v.kind}, {"detail", v.detail}, {"deviation", v.deviation}});
            }
            ctx.results = {{"valid", rep.ok()}, {"dim", m.dim}, {"outcomes", m.labels()}};
            if (!meta.name.empty()) {
                ctx.results["name"] = meta.name;
            }
            ctx.results["violations"] = violations;
            if (rep.ok()) {
                Json ranks = Json::array();
                for (std::size_t i = 0; i < m.size(); ++i) {
                    ranks.push_back(m.rank(i));
                }
                ctx.results["ranks"] = ranks;
                ctx.results["von_neumann"] = as_von_neumann(m).has_value();
            } else {
                err << "validation failed:\n" << rep.summary();
                code = kInvalid;
            }
        } else if (*corr_cmd) {
            const auto m = ctx.load_apparatus(file_a);
            const auto nn = align_labels(m, ctx.load_apparatus(file_b));
            Json overlaps = Json::array();
            for (const auto &p : m.outcomes) {
                Json row = Json::array();
                for (const auto &q : nn.outcomes) {
                    row.push_back(operator_norm(p.projector * q.projector));
                }
                overlaps.push_back(row);
            }
            ctx.results["labels"] = m.labels();
            ctx.results["overlap_norms"] = overlaps;
            const auto vm = as_von_neumann(m);
            const auto vn = as_von_neumann(nn);
            if (vm && vn) {
                ctx.results["correlation_unitary"] = io::to_json(correlation_unitary(*vm, *vn, ctx.tol).u);
                if (m.dim == 2) {
                    const auto pair = canonicalize_qubit_pair(*vm, *vn, ctx.tol);
                    ctx.results["theta"] = pair.theta;
                    ctx.results["phi"] = pair.phi;
                }
            } else {
                ctx.results["correlation_unitary"] = nullptr;
            }
        } else if (*plan_cmd) {
            const auto m = ctx.load_apparatus(file_a);
            const auto nn = ctx.load_apparatus(file_b);
            ctx.results["mode"] = mode;
            const Scheme s = detail::plan(m, nn, mode, n_max, max_subset, ctx);
            ctx.results["scheme"] = detail::scheme_summary(s);
            if (!out_path.empty()) {
                io::write_file(out_path, io::serialize_scheme(s));
                ctx.results["scheme_file"] = out_path;
            }
        } else if (*sim_cmd) {
            ctx.inputs.push_back(io::read_file(file_a));
            const Scheme s = io::parse_scheme(ctx.inputs.back(), ctx.tol);
            ctx.seed = seed;
            const auto stats = evaluate(s, trials, seed, ctx.tol, workers);
            ctx.results = {{"kind", std::string(scheme_kind(s))},
                           {"trials", stats.trials},
                           {"accuracy_given_m", stats.accuracy_given_m},
                           {"accuracy_given_n", stats.accuracy_given_n},
                           {"uses_per_trial", stats.uses_per_trial}};
        } else if (*dist_cmd) {
            const auto m = ctx.load_apparatus(file_a);
            const auto nn = ctx.load_apparatus(file_b);
            DistanceOptions opt;
            opt.tol = ctx.tol;
            opt.seed = dist_seed;
            ctx.seed = dist_seed;
            DistanceReport r;
            if (measure == "dmax") {
                r = dmax(m, nn, opt);
            } else if (measure == "dstab") {
                r = dstab(m, nn, opt);
            } else {
                r = fidelity(m, nn, measure == "fstab", opt);
            }
            ctx.results = detail::distance_json(r);
        } else if (*qubit_cmd) {
            if (!(theta >= 0.0) || !(theta <= std::numbers::pi)) {
                throw PreconditionError("theta must lie in [0, pi]");
            }
            const auto [s, t] = qubit_observables(theta, phi);
            const std::string ps = prefix + "_S.json";
            const std::string pt = prefix + "_T.json";
            std::ostringstream desc;
            desc << std::setprecision(17) << "canonical qubit pair, theta = " << theta << ", phi = " << phi;
            io::write_file(ps, io::serialize_apparatus(s.to_projective(), {"S", desc.str()}));
            io::write_file(pt, io::serialize_apparatus(t.to_projective(), {"T", desc.str()}));
            ctx.results = {{"theta", theta}, {"phi", phi}, {"files", {ps, pt}}};
        } else if (*search_cmd) {
            const auto pair = QubitPair::from_theta(theta);
            ctx.results = {{"theta", theta}, {"n", n}, {"max_subset", max_subset}};
            if (auto subset = search_simple_submatrix(pair, n, max_subset, ctx.tol)) {
                const Vector xi = simple_state_from_subset(pair, n, *subset);
                const auto check = check_simple_state(xi, pair, n, ctx.tol);
                ctx.results["found"] = true;
                ctx.results["indices"] = *subset;
                ctx.results["smallest_singular"] = smallest_singular(principal_submatrix(pair, n, *subset));
                ctx.results["probe"] = io::to_json(xi);
                ctx.results["max_diagonal"] = check.max_magnitude;
            } else {
                ctx.results["found"] = false;
                code = kNoScheme;
            }
        }
    } catch (const NoScheme &e) {
        ctx.results["error"] = {{"kind", "no-scheme"}, {"message", e.what()}};
        err << "no scheme: " << e.what() << "\n";
        code = kNoScheme;
    } catch (const ParseError &e) {
        ctx.results["error"] = {{"kind", "parse"}, {"message", e.what()}, {"offset", e.offset}};
        err << "parse error at byte " << e.offset << ": " << e.what() << "\n";
        code = kInvalid;
    } catch (const ValidationError &e) {
        ctx.results["error"] = {{"kind", "validation"}, {"message", e.what()}};
        err << "validation failed: " << e.what() << "\n";
        code = kInvalid;
    } catch (const std::exception &e) {
        ctx.results["error"] = {{"kind", "error"}, {"message", e.what()}};
        err << "error: " << e.what() << "\n";
        code = kError;
    }
    out << detail::report(ctx).dump(2) << "\n";
    return code;
}

}  // namespace mdisc::cli
