#pragma once

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../continuous.hpp"
#include "../divergences.hpp"
#include "../exact_verifier.hpp"
#include "../loss_compiler.hpp"
#include "../sampling.hpp"
#include "divergence_spec.hpp"
#include "report_format.hpp"
#include "verify.hpp"

namespace bbp::cli {

enum ExitCode : int
{
    exit_ok = 0,
    exit_config = 2,
    exit_verification = 3,
    exit_source = 4
};

inline char const* seed_env = "BBP_SEED";

inline char const* output_help = R"(Exit codes: 0 success, 2 configuration error, 3 verification failure,
4 sample source or protocol error.

Machine output (--format machine): one line per record of space-separated
key=value fields ('%', '=', '{' and whitespace are written as %XX), then a
final single-line JSON object of string fields. Every record has a
"record" field:
  config   command plus every setting needed to rerun, including seed
  result   eval: mean std_error ci_low ci_high replicates seed loss
           [target_value when both distributions are given]
           cramer: loss value
  check    verify: name mode gap pass seconds detail
  row      demo-bias: n q1 closed_form stationary grid_argmin gap flag
           compile-info: name deg_p deg_q min_n min_m monomials sampling
  summary  status plus command-specific totals
The default seed comes from the BBP_SEED environment variable, else 1.)";

namespace detail {

inline std::vector<std::string> split(std::string const& text, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep))
        out.push_back(item);
    return out;
}

inline Distribution<double> parse_distribution(std::string const& text)
{
    std::vector<double> probs;
    for (auto const& field : split(text, ','))
        probs.push_back(parse_scalar<double>(field));
    return Distribution<double>(std::move(probs));
}

inline std::uint64_t default_seed()
{
    if (char const* env = std::getenv(seed_env); env && *env)
    {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        bbp::detail::require(end && *end == '\0', ErrorCode::ParseError,
                             std::string(seed_env) + " must be a decimal integer");
        return v;
    }
    return 1;
}

struct SourceArgs
{
    std::string file;
    std::string command;
    std::string dist;

    bool given() const { return !file.empty() || !command.empty() || !dist.empty(); }

    std::string describe() const
    {
        if (!file.empty())
            return "file:" + file;
        if (!command.empty())
            return "cmd:" + command;
        return "dist:" + dist;
    }

    SampleSource make(Domain const& domain, char const* side) const
    {
        int given_count = !file.empty() + !command.empty() + !dist.empty();
        if (given_count != 1)
            bbp::detail::fail(ErrorCode::InvalidArgument,
                              std::string("give exactly one ") + side + " source (file, command or distribution)");
        if (!file.empty())
            return SampleSource::file(domain, file);
        if (!command.empty())
            return SampleSource::subprocess(domain, command);
        return SampleSource::internal(domain, parse_distribution(dist));
    }
};

struct Common
{
    std::string format = "human";
    std::optional<std::uint64_t> seed;
    std::string domain;
    std::size_t d = 2;

    Domain make_domain() const
    {
        if (!domain.empty())
            return Domain(split(domain, ','));
        return Domain::indexed(d);
    }
};

inline void emit(Document const& doc, std::string const& format, std::ostream& out)
{
    out << (format == "machine" ? render_machine(doc) : render_human(doc));
}

//---------------------------------------------------------------------------//
struct EvalArgs
{
    std::string divergence;
    std::optional<int> n, m;
    std::optional<double> alpha, beta;
    SourceArgs model, target;
    int replicates = 1000;
    unsigned threads = 0;
};

inline int cmd_eval(Common const& common, EvalArgs const& a, std::ostream& out)
{
    Domain domain = common.make_domain();
    std::size_t const d = domain.size();
    DivergenceSpec spec = parse_divergence(a.divergence, d);
    if (spec.poly && spec.poly->dimension() != d)
        bbp::detail::fail(ErrorCode::DimensionMismatch, "divergence is over " + std::to_string(spec.poly->dimension())
                                                             + " outcomes but the domain has " + std::to_string(d));
    std::uint64_t const seed = common.seed.value_or(default_seed());

    Record config("config");
    config.set("command", "eval").set("divergence", a.divergence).set("domain", [&] {
        std::string s;
        for (auto const& l : domain.labels())
            s += (s.empty() ? "" : ",") + l;
        return s;
    }());

    std::optional<CompiledLoss<double>> loss;
    std::optional<TargetEstimator<double>> target_only;
    if (spec.poly)
    {
        if (a.alpha || a.beta)
            bbp::detail::fail(ErrorCode::InvalidArgument, "polynomial divergences use fixed sizes --n and --m");
        int n = a.n.value_or(std::max(spec.poly->deg_p(), 1));
        int m = a.m.value_or(std::max(spec.poly->deg_q(), 1));
        config.set("n", std::to_string(n)).set("m", std::to_string(m));
        loss = compile_bb(spec.poly->convert<double>(), n, m);
    }
    else
    {
        switch (spec.series->kind)
        {
            case SeriesKind::CrossEntropy:
                bbp::detail::require(a.alpha.has_value(), ErrorCode::InvalidArgument, "cross-entropy needs --alpha");
                bbp::detail::require(a.beta.has_value() != a.m.has_value(), ErrorCode::InvalidArgument,
                                     "cross-entropy needs exactly one of --beta and --m");
                config.set("alpha", format_scalar(*a.alpha));
                if (a.beta)
                {
                    config.set("beta", format_scalar(*a.beta));
                    loss = cross_entropy_poisson<double>(*a.alpha, *a.beta);
                }
                else
                {
                    config.set("m", std::to_string(*a.m));
                    loss = cross_entropy_poisson_fixed_q<double>(*a.alpha, *a.m);
                }
                break;
            case SeriesKind::KL:
                bbp::detail::require(a.alpha && a.beta, ErrorCode::InvalidArgument, "kl needs --alpha and --beta");
                config.set("alpha", format_scalar(*a.alpha)).set("beta", format_scalar(*a.beta));
                loss = kl_poisson<double>(*a.alpha, *a.beta);
                break;
            case SeriesKind::ShannonEntropy:
                bbp::detail::require(a.beta.has_value(), ErrorCode::InvalidArgument, "entropy needs --beta");
                config.set("beta", format_scalar(*a.beta));
                target_only = entropy_poisson<double>(*a.beta);
                break;
        }
    }
    if (!target_only)
        config.set("model", a.model.describe());
    config.set("target", a.target.describe());
    config.set("replicates", std::to_string(a.replicates)).set("seed", std::to_string(seed));

    EstimateReport report{};
    std::string provenance;
    std::optional<double> target_value;
    {
        SampleSource target = a.target.make(domain, "target");
        if (target_only)
        {
            report = estimate_loss(target, *target_only, a.replicates, seed, a.threads);
            provenance = target_only->provenance();
            if (!a.target.dist.empty())
            {
                auto q = parse_distribution(a.target.dist);
                target_value = spec.series->evaluate(q, q);
            }
        }
        else
        {
            SampleSource model = a.model.make(domain, "model");
            report = estimate_loss(model, target, *loss, a.replicates, seed, a.threads);
            provenance = loss->provenance();
            model.close();
            if (!a.model.dist.empty() && !a.target.dist.empty())
                target_value = eval_divergence(spec.as_float(), parse_distribution(a.model.dist),
                                               parse_distribution(a.target.dist));
        }
        target.close();
    }

    Record result("result");
    result.set("loss", provenance)
        .set("mean", format_scalar(report.mean))
        .set("std_error", format_scalar(report.std_error))
        .set("ci_low", format_scalar(report.ci_low))
        .set("ci_high", format_scalar(report.ci_high))
        .set("replicates", std::to_string(report.replicates))
        .set("seed", std::to_string(report.seed));
    if (target_value)
        result.set("target_value", format_scalar(*target_value));
    Document doc{{config, result}, Record("summary")};
    doc.summary.set("status", "ok").set("command", "eval").set("mean", format_scalar(report.mean))
        .set("std_error", format_scalar(report.std_error)).set("seed", std::to_string(seed));
    emit(doc, common.format, out);
    return exit_ok;
}

//---------------------------------------------------------------------------//
struct VerifyArgs
{
    std::vector<std::string> only;
    std::string mode = "exact";
    bool list = false;
};

inline int cmd_verify(Common const& common, VerifyArgs const& a, std::ostream& out)
{
    auto suite = verify_suite();
    if (a.list)
    {
        for (auto const& c : suite)
            out << c.name << "\t" << (c.exact ? "Exact" : "Truncated") << "\t" << c.description << "\n";
        return exit_ok;
    }
    std::vector<CheckDef> selected;
    for (auto const& name : a.only)
    {
        auto it = std::find_if(suite.begin(), suite.end(), [&](auto const& c) { return c.name == name; });
        if (it == suite.end())
            bbp::detail::fail(ErrorCode::InvalidArgument, "unknown check '" + name + "' (see verify --list)");
        selected.push_back(*it);
    }
    if (selected.empty())
        selected = suite;
    if (a.mode == "float")
    {
        for (auto const& c : selected)
        {
            if (c.exact)
                bbp::detail::fail(ErrorCode::InvalidArgument,
                                  "check '" + c.name + "' is an exact identity and requires --mode exact");
        }
    }

    Document doc;
    Record config("config");
    std::string only;
    for (auto const& c : selected)
        only += (only.empty() ? "" : ",") + c.name;
    config.set("command", "verify").set("mode", a.mode).set("only", only);
    doc.records.push_back(config);
    int failed = 0;
    double total = 0;
    for (auto const& c : selected)
    {
        auto o = run_check(c);
        failed += !o.pass;
        total += o.seconds;
        Record r("check");
        char secs[32];
        std::snprintf(secs, sizeof(secs), "%.3f", o.seconds);
        r.set("name", o.name).set("mode", o.mode).set("gap", o.gap).set("pass", o.pass ? "true" : "false")
            .set("seconds", secs).set("detail", o.detail);
        if (common.format == "machine")
            doc.records.push_back(r);
        else
            out << (o.pass ? "PASS " : "FAIL ") << o.name << " [" << o.mode << "] gap=" << o.gap << " (" << secs
                << " s) " << o.detail << "\n";
    }
    doc.summary.set("status", failed ? "failed" : "ok").set("command", "verify")
        .set("checks", std::to_string(selected.size())).set("failed", std::to_string(failed));
    if (common.format == "machine")
        out << render_machine(doc);
    else
        out << selected.size() - failed << "/" << selected.size() << " checks passed\n";
    return failed ? exit_verification : exit_ok;
}

//---------------------------------------------------------------------------//
struct DemoBiasArgs
{
    std::string q = "0.1,0.9";
    int n_min = 2;
    int n_max = 20;
};

inline int cmd_demo_bias(Common const& common, DemoBiasArgs const& a, std::ostream& out)
{
    auto q = parse_distribution(a.q);
    bbp::detail::require(q.size() == 2, ErrorCode::InvalidArgument, "demo-bias needs a two-outcome target");
    bbp::detail::require(a.n_min >= 1 && a.n_min <= a.n_max, ErrorCode::InvalidArgument, "need 1 <= n-min <= n-max");
    Document doc;
    Record config("config");
    config.set("command", "demo-bias").set("q", a.q).set("n_min", std::to_string(a.n_min))
        .set("n_max", std::to_string(a.n_max));
    doc.records.push_back(config);
    bool below = true;
    for (int n = a.n_min; n <= a.n_max; ++n)
    {
        auto demo = naive_plugin_bias_demo(q, n);
        Record row("row");
        row.set("n", std::to_string(n)).set("q1", format_scalar(q[0])).set("closed_form", format_scalar(demo.closed_form));
        if (n == 1)
        {
            row.set("stationary", "undefined").set("grid_argmin", "-").set("gap", format_scalar(demo.closed_form - q[0]))
                .set("flag", "linear-objective");
        }
        else
        {
            row.set("stationary", format_scalar(demo.stationary)).set("grid_argmin", format_scalar(demo.grid_argmin))
                .set("gap", format_scalar(demo.closed_form - q[0])).set("flag", demo.clipped ? "clipped" : "-");
            if (q[0] < 0.5)
                below = below && demo.closed_form < q[0];
        }
        doc.records.push_back(row);
    }
    doc.summary.set("status", "ok").set("command", "demo-bias");
    if (q[0] < 0.5)
        doc.summary.set("argmin_below_q1", below ? "true" : "false");
    emit(doc, common.format, out);
    return exit_ok;
}

//---------------------------------------------------------------------------//
struct CompileInfoArgs
{
    std::string divergence;
    std::optional<int> n, m;
};

inline int cmd_compile_info(Common const& common, CompileInfoArgs const& a, std::ostream& out)
{
    Domain domain = common.make_domain();
    DivergenceSpec spec = parse_divergence(a.divergence, domain.size());
    Document doc;
    Record config("config");
    config.set("command", "compile-info").set("divergence", a.divergence).set("d", std::to_string(domain.size()));
    doc.records.push_back(config);
    Record row("row");
    row.set("name", spec.name());
    if (spec.poly)
    {
        int const min_n = std::max(spec.poly->deg_p(), 1);
        int const min_m = std::max(spec.poly->deg_q(), 1);
        row.set("deg_p", std::to_string(spec.poly->deg_p())).set("deg_q", std::to_string(spec.poly->deg_q()))
            .set("min_n", std::to_string(min_n)).set("min_m", std::to_string(min_m))
            .set("monomials", std::to_string(spec.poly->monomials().size())).set("sampling", "fixed");
        doc.records.push_back(row);
        if (a.n || a.m)
        {
            // throws DegreeGateError below the degree
            auto loss = compile_bb(spec.poly->convert<double>(), a.n.value_or(min_n), a.m.value_or(min_m));
            doc.summary.set("compiled", loss.provenance());
        }
    }
    else
    {
        row.set("deg_p", "inf").set("deg_q", spec.series->kind == SeriesKind::CrossEntropy ? "1" : "inf")
            .set("min_n", "-").set("min_m", "-").set("monomials", "series").set("sampling", "poisson");
        doc.records.push_back(row);
    }
    doc.summary.set("status", "ok").set("command", "compile-info");
    emit(doc, common.format, out);
    return exit_ok;
}

//---------------------------------------------------------------------------//
struct CramerArgs
{
    std::string loss = "cramer";
    std::string model;
    std::string target;
    std::optional<double> y;
};

inline int cmd_cramer(Common const& common, CramerArgs const& a, std::ostream& out)
{
    Record config("config");
    config.set("command", "cramer").set("loss", a.loss).set("model", a.model);
    double value = 0;
    if (a.loss == "crps")
    {
        bbp::detail::require(a.y.has_value() && a.target.empty(), ErrorCode::InvalidArgument,
                             "crps takes --y instead of --target");
        config.set("y", format_scalar(*a.y));
        value = crps(read_real_sample(a.model), *a.y);
    }
    else
    {
        bbp::detail::require(!a.target.empty(), ErrorCode::InvalidArgument, a.loss + " needs --target");
        config.set("target", a.target);
        if (a.loss == "cramer")
            value = cramer_loss(read_real_sample(a.model), read_real_sample(a.target));
        else if (a.loss == "energy")
            value = energy_loss(read_real_sample(a.model), read_real_sample(a.target));
        else if (a.loss == "projected")
        {
            std::uint64_t seed = common.seed.value_or(default_seed());
            config.set("seed", std::to_string(seed));
            value = projected_cramer_loss(read_vector_sample(a.model), read_vector_sample(a.target), seed);
        }
        else
            bbp::detail::fail(ErrorCode::InvalidArgument, "unknown loss '" + a.loss + "' (cramer, energy, crps, projected)");
    }
    Record result("result");
    result.set("loss", a.loss).set("value", format_scalar(value));
    Document doc{{config, result}, Record("summary")};
    doc.summary.set("status", "ok").set("command", "cramer").set("value", format_scalar(value));
    emit(doc, common.format, out);
    return exit_ok;
}

inline int exit_code_for(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::TokenUnknown:
        case ErrorCode::SourceExhausted:
        case ErrorCode::SubprocessFailure: return exit_source;
        default: return exit_config;
    }
}

}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Parse \c args (without the program name), run the command and return the
 * process exit code. Results go to \c out, diagnostics to \c err.
 */
inline int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Proper losses from black-box samples: compile, estimate and verify.", "bbp"};
    app.footer(output_help);
    app.require_subcommand(1, 1);

    detail::Common common;
    auto add_common = [&](CLI::App* sub, bool domain) {
        sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"human", "machine"}));
        sub->add_option("--seed", common.seed, "Run seed (default: $BBP_SEED, else 1)");
        if (domain)
        {
            sub->add_option("--domain", common.domain, "Comma-separated outcome labels");
            sub->add_option("--d", common.d, "Domain size when --domain is absent (labels 0..d-1)")
                ->check(CLI::PositiveNumber);
        }
    };

    detail::EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Monte Carlo estimate of the expected loss");
    add_common(eval_cmd, true);
    eval_cmd->add_option("--divergence", eval.divergence, std::string("Builtin (") + builtin_names + ") or JSON file")
        ->required();
    eval_cmd->add_option("--n", eval.n, "Model sample size")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--m", eval.m, "Target sample size")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--alpha", eval.alpha, "Poisson rate of model draws")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--beta", eval.beta, "Poisson rate of target draws")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--model", eval.model.file, "Model sample file")->check(CLI::ExistingFile);
    eval_cmd->add_option("--model-cmd", eval.model.command, "Model generator command");
    eval_cmd->add_option("--model-dist", eval.model.dist, "Model distribution, e.g. 0.25,0.75");
    eval_cmd->add_option("--target", eval.target.file, "Target sample file")->check(CLI::ExistingFile);
    eval_cmd->add_option("--target-cmd", eval.target.command, "Target generator command");
    eval_cmd->add_option("--target-dist", eval.target.dist, "Target distribution");
    eval_cmd->add_option("--replicates", eval.replicates, "Independent loss evaluations")->check(CLI::Range(2, 100000000));
    eval_cmd->add_option("--threads", eval.threads, "Worker threads for internal sources (0: all cores)");

    detail::VerifyArgs verify;
    auto* verify_cmd = app.add_subcommand("verify", "Run the exact verification suite");
    add_common(verify_cmd, false);
    verify_cmd->add_option("--only", verify.only, "Run only the named checks");
    verify_cmd->add_option("--mode", verify.mode, "Numeric mode")->check(CLI::IsMember({"exact", "float"}));
    verify_cmd->add_flag("--list", verify.list, "List the checks and exit");

    detail::DemoBiasArgs bias;
    auto* bias_cmd = app.add_subcommand("demo-bias", "Minimizer of the naive plug-in loss for a two-outcome target");
    add_common(bias_cmd, false);
    bias_cmd->add_option("--q", bias.q, "Target distribution");
    bias_cmd->add_option("--n-min", bias.n_min, "Smallest sample size");
    bias_cmd->add_option("--n-max", bias.n_max, "Largest sample size");

    detail::CompileInfoArgs info;
    auto* info_cmd = app.add_subcommand("compile-info", "Degrees and minimal sample sizes of a divergence");
    add_common(info_cmd, true);
    info_cmd->add_option("--divergence", info.divergence, "Builtin or JSON file")->required();
    info_cmd->add_option("--n", info.n, "Try compiling at this model sample size")->check(CLI::PositiveNumber);
    info_cmd->add_option("--m", info.m, "Try compiling at this target sample size")->check(CLI::PositiveNumber);

    detail::CramerArgs cramer;
    auto* cramer_cmd = app.add_subcommand("cramer", "Cramer, energy, CRPS or projected Cramer loss of real samples");
    add_common(cramer_cmd, false);
    cramer_cmd->add_option("--loss", cramer.loss, "cramer | energy | crps | projected");
    cramer_cmd->add_option("--model", cramer.model, "Model sample file")->required()->check(CLI::ExistingFile);
    cramer_cmd->add_option("--target", cramer.target, "Target sample file")->check(CLI::ExistingFile);
    cramer_cmd->add_option("--y", cramer.y, "Single target draw for crps");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try
    {
        app.parse(reversed);
    }
    catch (CLI::CallForHelp const&)
    {
        out << app.help();
        return exit_ok;
    }
    catch (CLI::CallForAllHelp const&)
    {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    }
    catch (CLI::ParseError const& e)
    {
        err << "error: " << e.what() << "\n";
        return exit_config;
    }

    try
    {
        if (eval_cmd->parsed())
            return detail::cmd_eval(common, eval, out);
        if (verify_cmd->parsed())
            return detail::cmd_verify(common, verify, out);
        if (bias_cmd->parsed())
            return detail::cmd_demo_bias(common, bias, out);
        if (info_cmd->parsed())
            return detail::cmd_compile_info(common, info, out);
        if (cramer_cmd->parsed())
        {
            try
            {
                return detail::cmd_cramer(common, cramer, out);
            }
            catch (Error const& e)
            {
                if (e.code() != ErrorCode::ParseError)
                    throw;
                err << "error: " << e.what() << "\n";
                return exit_source;
            }
        }
    }
    catch (Error const& e)
    {
        err << "error: " << e.what() << "\n";
        return detail::exit_code_for(e.code());
    }
    catch (std::exception const& e)
    {
        err << "error: " << e.what() << "\n";
        return exit_config;
    }
    return exit_config;
}

}  // namespace bbp::cli
