// rmprod: tables, simulations and the acceptance suite from the command line.
//
// Exit codes: 0 success, 1 a verification check failed, 2 usage or I/O
// error, 3 numerical failure.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rmprod/rmprod.hpp"

namespace
{
using namespace rmprod;
using io::Json;

enum Exit
{
    ok = 0,
    check_failed = 1,
    usage = 2,
    numerical = 3
};

//! A number, or a multiple of pi such as "pi/20", "9pi/20", "-pi/6".
double parse_number(std::string tok)
{
    std::string const orig = tok;
    double sign = 1;
    if (!tok.empty() && (tok[0] == '-' || tok[0] == '+'))
    {
        sign = tok[0] == '-' ? -1 : 1;
        tok.erase(0, 1);
    }
    auto pos = tok.find("pi");
    std::size_t used = 0;
    try
    {
        if (pos == std::string::npos)
        {
            double v = std::stod(tok, &used);
            if (used != tok.size())
                throw std::invalid_argument(orig);
            return sign * v;
        }
        double k = 1;
        if (pos > 0)
        {
            std::string head = tok.substr(0, pos);
            if (head.back() == '*')
                head.pop_back();
            k = std::stod(head, &used);
            if (used != head.size())
                throw std::invalid_argument(orig);
        }
        double d = 1;
        std::string tail = tok.substr(pos + 2);
        if (!tail.empty())
        {
            if (tail[0] != '/')
                throw std::invalid_argument(orig);
            tail.erase(0, 1);
            d = std::stod(tail, &used);
            if (used != tail.size())
                throw std::invalid_argument(orig);
        }
        return sign * k * pi / d;
    }
    catch (std::logic_error const&)
    {
        throw PreconditionError("cannot parse number '" + orig + "'");
    }
}

//! Comma-separated values or lo:hi:count for an inclusive linear range.
std::vector<double> parse_list(std::string const& text)
{
    std::vector<double> out;
    if (std::count(text.begin(), text.end(), ':') == 2)
    {
        auto a = text.find(':'), b = text.rfind(':');
        double lo = parse_number(text.substr(0, a));
        double hi = parse_number(text.substr(a + 1, b - a - 1));
        int n = static_cast<int>(parse_number(text.substr(b + 1)));
        if (n < 1)
            throw PreconditionError("range needs a positive count");
        for (int i = 0; i < n; ++i)
            out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
        return out;
    }
    std::size_t start = 0;
    while (start <= text.size())
    {
        auto end = text.find(',', start);
        if (end == std::string::npos)
            end = text.size();
        out.push_back(parse_number(text.substr(start, end - start)));
        start = end + 1;
    }
    return out;
}

double parse_single(std::string const& text, char const* what)
{
    auto v = parse_list(text);
    if (v.size() != 1)
        throw PreconditionError(std::string(what) + " takes a single value");
    return v[0];
}

//! Every option of the subcommand with its resolved value.
Json resolved_options(CLI::App const& app)
{
    Json j = Json::object();
    for (auto const* opt : app.get_options())
    {
        if (opt->get_lnames().empty())
            continue;
        std::string key = opt->get_lnames().front();
        if (key == "help")
            continue;
        if (opt->get_expected_max() == 0)
            j[key] = opt->count() > 0;
        else if (opt->count() > 0)
            j[key] = opt->as<std::string>();
        else
            j[key] = opt->get_default_str();
    }
    return j;
}

struct Common
{
    std::string format = "csv";
    std::string out = "-";
    std::uint64_t seed = 1;
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--format", c.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app->add_option("--out", c.out, "output file, '-' for stdout")
        ->capture_default_str();
    app->add_option("--seed", c.seed, "random seed")->capture_default_str();
}

void emit(std::string const& text, std::string const& path)
{
    if (path == "-")
    {
        std::cout << text;
        std::cout.flush();
    }
    else
    {
        io::write_file(path, text);
    }
}

void emit_table(io::Table t, CLI::App const& app, Common const& c)
{
    t.meta["config"] = resolved_options(app);
    t.meta["config"]["command"] = app.get_name();
    emit(io::serialize(t, io::parse_format(c.format)), c.out);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Products of random 2x2 matrices with gamma-distributed "
                 "entries: invariant densities, Lyapunov exponents, "
                 "simulations and checks."};
    app.require_subcommand(1);
    app.set_version_flag("--version", "rmprod 1.0");

    // density
    Common dc;
    std::string d_p = "1", d_s = "1", d_alpha = "pi/6";
    tables::DensityGrid dg;
    auto* density = app.add_subcommand("density", "invariant density on a grid");
    add_common(density, dc);
    density->add_option("--p", d_p, "gamma shape")->capture_default_str();
    density->add_option("--s", d_s, "gamma scale")->capture_default_str();
    density->add_option("--alpha", d_alpha, "ray angle, e.g. pi/20")
        ->capture_default_str();
    density->add_option("--grid-r", dg.r_cells, "radial cells")
        ->capture_default_str();
    density->add_option("--grid-theta", dg.theta_cells, "angular cells")
        ->capture_default_str();
    density->add_option("--grid-y", dg.y_cells, "cells on the imaginary axis")
        ->capture_default_str();
    density->add_option("--r-min", dg.r_min)->capture_default_str();
    density->add_option("--r-max", dg.r_max)->capture_default_str();

    // lyapunov
    Common lc;
    std::string l_p = "1", l_s = "0.1:4:40", l_alpha = "pi/2";
    tables::LyapunovOptions lo;
    auto* lyap = app.add_subcommand("lyapunov",
                                    "exact exponent next to its approximations");
    add_common(lyap, lc);
    lyap->add_option("--p", l_p, "list a,b,c or range lo:hi:n")
        ->capture_default_str();
    lyap->add_option("--s", l_s, "list or range")->capture_default_str();
    lyap->add_option("--alpha", l_alpha, "list or range")
        ->capture_default_str();
    lyap->add_option("--small-s-order", lo.small_s_order)
        ->check(CLI::Range(1, 64))
        ->capture_default_str();
    lyap->add_option("--pade-degree", lo.pade_degree,
                     "diagonal approximant [d/d]")
        ->check(CLI::Range(1, 32))
        ->capture_default_str();

    // simulate
    Common sc;
    std::string s_p = "1", s_s = "1", s_alpha = "pi/6", s_mode = "estimate";
    long long s_n = 1000000, s_burn = default_burn_in;
    int s_streams = 1;
    tables::DensityGrid sg;
    sg.r_cells = 40;
    sg.theta_cells = 16;
    sg.y_cells = 80;
    sg.r_min = 1e-2;
    sg.r_max = 1e2;
    sg.u_max = 6;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates");
    add_common(sim, sc);
    sim->add_option("--p", s_p)->capture_default_str();
    sim->add_option("--s", s_s)->capture_default_str();
    sim->add_option("--alpha", s_alpha)->capture_default_str();
    sim->add_option("--n", s_n, "steps per stream")->capture_default_str();
    sim->add_option("--burn-in", s_burn)->capture_default_str();
    sim->add_option("--streams", s_streams, "independent streams, one thread each")
        ->check(CLI::Range(1, 256))
        ->capture_default_str();
    sim->add_option("--mode", s_mode, "estimate or histogram")
        ->check(CLI::IsMember({"estimate", "histogram"}))
        ->capture_default_str();
    sim->add_option("--grid-r", sg.r_cells)->capture_default_str();
    sim->add_option("--grid-theta", sg.theta_cells)->capture_default_str();
    sim->add_option("--grid-y", sg.y_cells)->capture_default_str();

    // schrodinger
    Common qc;
    std::string q_p = "1,2", q_s = "1,0.5";
    long long q_n = 1000000;
    int q_streams = 1;
    auto* schr = app.add_subcommand("schrodinger",
                                    "localisation rate at energy 2");
    add_common(schr, qc);
    schr->add_option("--p", q_p)->capture_default_str();
    schr->add_option("--s", q_s)->capture_default_str();
    schr->add_option("--n", q_n, "simulated sites per stream, 0 to skip")
        ->capture_default_str();
    schr->add_option("--streams", q_streams)
        ->check(CLI::Range(1, 256))
        ->capture_default_str();

    // pade
    Common pc;
    double pa_p = 1, pa_sigma = 1, pa_t_re = 1, pa_t_im = 0;
    int pa_n = 200, pa_reps = 20;
    auto* pade = app.add_subcommand(
        "pade", "truncation error of random Stieltjes fractions");
    add_common(pade, pc);
    pade->add_option("--p", pa_p)->capture_default_str();
    pade->add_option("--sigma", pa_sigma)->capture_default_str();
    pade->add_option("--t-re", pa_t_re)->capture_default_str();
    pade->add_option("--t-im", pa_t_im)->capture_default_str();
    pade->add_option("--n", pa_n, "largest fitted depth")->capture_default_str();
    pade->add_option("--reps", pa_reps)->capture_default_str();

    // verify
    Common vc;
    vc.format = "json";
    verify::Options vo;
    bool v_timings = false, v_quiet = false;
    auto* ver = app.add_subcommand("verify", "run the acceptance checks");
    ver->add_option("--out", vc.out, "report file, '-' for stdout")
        ->capture_default_str();
    ver->add_option("--seed", vo.seed)->capture_default_str();
    ver->add_option("--only", vo.only, "check ids to run")
        ->delimiter(',')
        ->check(CLI::Range(1, verify::check_count));
    ver->add_option("--fault-normalization", vo.normalization_scale,
                    "multiply normalisation constants (self-test)")
        ->capture_default_str();
    ver->add_flag("--timings", v_timings, "include run times in the report");
    ver->add_flag("--quiet", v_quiet, "no per-check lines on stderr");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::usage;
    }

    try
    {
        QuadratureConfig cfg = QuadratureConfig::from_environment();
        if (*density)
        {
            ModelParams q{parse_single(d_p, "--p"), parse_single(d_s, "--s"),
                          parse_single(d_alpha, "--alpha")};
            emit_table(tables::density_table(q, dg, cfg), *density, dc);
        }
        else if (*lyap)
        {
            emit_table(tables::lyapunov_table(parse_list(l_p), parse_list(l_s),
                                              parse_list(l_alpha), lo, cfg),
                       *lyap, lc);
        }
        else if (*sim)
        {
            ModelParams q{parse_single(s_p, "--p"), parse_single(s_s, "--s"),
                          parse_single(s_alpha, "--alpha")};
            auto t = s_mode == "estimate"
                         ? tables::simulate_estimates(q, s_n, s_burn,
                                                      s_streams, sc.seed, cfg)
                         : tables::simulate_histogram(q, s_n, s_burn,
                                                      s_streams, sc.seed, sg,
                                                      cfg);
            emit_table(std::move(t), *sim, sc);
        }
        else if (*schr)
        {
            emit_table(tables::schrodinger_table(parse_list(q_p),
                                                 parse_list(q_s), q_n,
                                                 q_streams, qc.seed, cfg),
                       *schr, qc);
        }
        else if (*pade)
        {
            emit_table(tables::pade_table(pa_p, pa_sigma, {pa_t_re, pa_t_im},
                                          pa_n, pa_reps, pc.seed, cfg),
                       *pade, pc);
        }
        else if (*ver)
        {
            vo.cfg = cfg;
            auto results = verify::run(vo);
            if (!v_quiet)
                for (auto const& r : results)
                    std::cerr << verify::summary_line(r) << '\n';
            emit(verify::report(results, vo, v_timings).dump(1) + '\n', vc.out);
            return verify::all_passed(results) ? Exit::ok : Exit::check_failed;
        }
    }
    catch (io::IoError const& e)
    {
        std::cerr << "rmprod: " << e.what() << '\n';
        return Exit::usage;
    }
    catch (PreconditionError const& e)
    {
        std::cerr << "rmprod: " << e.what() << '\n';
        return Exit::usage;
    }
    catch (DomainError const& e)
    {
        std::cerr << "rmprod: " << e.what() << '\n';
        return Exit::usage;
    }
    catch (UnsupportedError const& e)
    {
        std::cerr << "rmprod: " << e.what() << '\n';
        return Exit::usage;
    }
    catch (std::exception const& e)
    {
        std::cerr << "rmprod: numerical failure: " << e.what() << '\n';
        return Exit::numerical;
    }
    return Exit::ok;
}
