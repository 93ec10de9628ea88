#include "sparseconf/cli.hpp"

#include "sparseconf/baselines.hpp"
#include "sparseconf/conformal.hpp"
#include "sparseconf/diagnostics.hpp"
#include "sparseconf/error.hpp"
#include "sparseconf/export.hpp"
#include "sparseconf/path.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

namespace sparseconf {

namespace fs = std::filesystem;

std::string to_string(Command command)
{
    switch (command) {
    case Command::Path: return "path";
    case Command::Conformal: return "conformal";
    case Command::Baseline: return "baseline";
    case Command::Diagnose: return "diagnose";
    case Command::Bench: return "bench";
    }
    return "unknown";
}

LossModel RunConfig::loss_model() const
{
    return parse_loss(loss, q, gamma);
}

void RunConfig::validate() const
{
    static const std::vector<std::string> datasets{"synthetic", "large", "friedman1", "friedman2", "csv"};
    if (std::find(datasets.begin(), datasets.end(), dataset) == datasets.end())
        throw Error(ErrorKind::InvalidArgument, "unknown dataset '" + dataset + "'");
    if (dataset == "csv" && csv_path.empty())
        throw Error(ErrorKind::InvalidArgument, "--dataset csv needs --csv-path");
    if (dataset != "csv" && !csv_path.empty())
        throw Error(ErrorKind::InvalidArgument, "--csv-path is only valid with --dataset csv");
    if (dataset == "csv" && label.empty())
        throw Error(ErrorKind::InvalidArgument, "--dataset csv needs --label");
    if (n < 2 || p < 1)
        throw Error(ErrorKind::InvalidArgument, "--n must be >= 2 and --p >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorKind::InvalidArgument, "--alpha must lie in (0, 1)");
    if (lambda < 0.0)
        throw Error(ErrorKind::InvalidArgument, "--lambda must be positive (or 0 for the default)");
    if (eps_tol < 0.0)
        throw Error(ErrorKind::InvalidArgument, "--eps-tol must be positive (or 0 for the default)");
    if (trials < 1 || jobs < 1 || probes < 1 || curve_points < 2)
        throw Error(ErrorKind::InvalidArgument, "--trials, --jobs and --probes must be positive");
    BaselineConfig bc;
    bc.grid_points = grid_points;
    bc.split_fraction = split_fraction;
    bc.validate();
    for (const std::string& m : methods)
        if (m != "homotopy")
            parse_baseline(m);
    loss_model().validate();
}

namespace {

SolverConfig solver_for(const RunConfig& cfg, const LossModel& model)
{
    SolverConfig sc = SolverConfig::defaults_for(model);
    if (cfg.eps_tol > 0.0)
        sc.eps_tol = cfg.eps_tol;
    return sc;
}

Dataset generate(const RunConfig& cfg, std::uint64_t seed)
{
    GenOptions go;
    go.center = cfg.center;
    if (cfg.dataset == "synthetic")
        return gen_synthetic(cfg.n + 1, cfg.p, seed, go);
    if (cfg.dataset == "large")
        return gen_synthetic(21, 1000, seed, go);
    if (cfg.dataset == "friedman1")
        return gen_friedman1(cfg.n + 1, seed, cfg.noise_sd >= 0.0 ? cfg.noise_sd : 1.0, go);
    if (cfg.dataset == "friedman2")
        return gen_friedman2(cfg.n + 1, seed, cfg.noise_sd >= 0.0 ? cfg.noise_sd : 125.0, go);

    Dataset d = load_csv(cfg.csv_path, cfg.label, true, cfg.center);
    if (seed != cfg.seed) {
        // bench trials over a fixed file draw a different query row each time
        std::vector<Eigen::Index> order(static_cast<std::size_t>(d.n()));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        Rng rng(seed);
        shuffle(order, rng);
        const Eigen::Index last = order.back();
        d.X.row(last).swap(d.X.row(d.n() - 1));
        std::swap(d.y[last], d.y[d.n() - 1]);
    }
    return d;
}

} // namespace

Problem make_problem(const RunConfig& cfg, std::uint64_t seed)
{
    Problem pr;
    pr.data = generate(cfg, seed);
    auto [xq, yq] = hold_out(pr.data, pr.data.n() - 1);
    pr.x_query = std::move(xq);
    pr.y_query = yq;
    if (cfg.lambda > 0.0) {
        pr.lambda = cfg.lambda;
    } else {
        const Matrix Xa = augment(pr.data.X, pr.x_query);
        Vector labels(pr.data.n() + 1);
        labels.head(pr.data.n()) = pr.data.y;
        labels[pr.data.n()] = pr.data.y.maxCoeff();
        pr.lambda = 0.1 * lambda_max(Xa, labels, cfg.loss_model());
        if (!(pr.lambda > 0.0))
            throw Error(ErrorKind::InvalidArgument, "default lambda is zero; pass --lambda");
    }
    return pr;
}

namespace {

struct TrialOutcome {
    std::vector<char> covered;
    std::vector<double> length;
    std::vector<double> seconds;
    std::vector<char> empty;
};

TrialOutcome run_trial(const RunConfig& cfg, std::uint64_t seed)
{
    const Problem pr = make_problem(cfg, seed);
    const LossModel model = cfg.loss_model();
    const SolverConfig sc = solver_for(cfg, model);
    BaselineConfig bc;
    bc.grid_points = cfg.grid_points;
    bc.split_fraction = cfg.split_fraction;
    bc.rng_seed = seed;

    TrialOutcome out;
    for (const std::string& m : cfg.methods) {
        const auto start = std::chrono::steady_clock::now();
        Interval iv;
        if (m == "homotopy") {
            const SolutionPath path = trace_path(pr.data.X, pr.data.y, pr.x_query, pr.lambda, model, sc);
            const ConformalResult cr = conformal_set(path, cfg.alpha);
            iv.empty = cr.empty;
            iv.lo = cr.lo;
            iv.hi = cr.hi;
        } else if (m == "grid") {
            iv = grid_conformal(pr.data.X, pr.data.y, pr.x_query, pr.lambda, model, cfg.alpha, sc, bc);
        } else if (m == "split") {
            iv = split_conformal(pr.data.X, pr.data.y, pr.x_query, pr.lambda, model, cfg.alpha, sc, bc);
        } else {
            iv = oracle_conformal(pr.data.X, pr.data.y, pr.x_query, pr.y_query, pr.lambda, model,
                                  cfg.alpha, sc);
        }
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
        out.covered.push_back(iv.contains(pr.y_query));
        out.length.push_back(iv.length());
        out.seconds.push_back(dt.count());
        out.empty.push_back(iv.empty);
    }
    return out;
}

} // namespace

std::vector<BenchRow> run_bench(const RunConfig& cfg)
{
    cfg.validate();
    const auto trials = static_cast<std::size_t>(cfg.trials);
    std::vector<TrialOutcome> outcomes(trials);
    std::vector<std::exception_ptr> failures(trials);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < trials; k = next++) {
            try {
                outcomes[k] = run_trial(cfg, cfg.seed + k);
            } catch (...) {
                failures[k] = std::current_exception();
            }
        }
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), trials);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    for (const auto& f : failures)
        if (f)
            std::rethrow_exception(f);

    std::vector<BenchRow> rows;
    const std::string loss_name = cfg.loss_model().name();
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        BenchRow row;
        row.method = cfg.methods[m];
        row.dataset = cfg.dataset;
        row.loss = loss_name;
        row.trials = cfg.trials;
        for (const TrialOutcome& o : outcomes) {
            row.coverage += o.covered[m];
            row.length += o.length[m];
            row.time_s += o.seconds[m];
            row.empty += o.empty[m];
        }
        row.coverage /= cfg.trials;
        row.length /= cfg.trials;
        row.time_s /= cfg.trials;
        rows.push_back(row);
    }
    return rows;
}

bool parse_args(int argc, const char* const* argv, RunConfig& cfg, int& exit_code)
{
    CLI::App app{"Conformal prediction sets from l1-regularized label paths"};
    std::string command = "conformal";
    std::string methods;
    app.add_option("--command", command, "path | conformal | baseline | diagnose | bench")
        ->check(CLI::IsMember({"path", "conformal", "baseline", "diagnose", "bench"}));
    app.add_option("--dataset", cfg.dataset, "synthetic | large | friedman1 | friedman2 | csv")
        ->check(CLI::IsMember({"synthetic", "large", "friedman1", "friedman2", "csv"}));
    app.add_option("--csv-path", cfg.csv_path, "CSV file (with --dataset csv)");
    app.add_option("--label", cfg.label, "label column name or 0-based index");
    app.add_option("--n", cfg.n, "training samples (one more row is drawn as the query)");
    app.add_option("--p", cfg.p, "features of the synthetic dataset");
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--noise-sd", cfg.noise_sd, "Friedman noise level");
    app.add_flag("--center", cfg.center, "subtract column means before scaling");
    app.add_option("--loss", cfg.loss, "quadratic | robust | asymmetric")
        ->check(CLI::IsMember({"quadratic", "robust", "asymmetric"}));
    app.add_option("--q", cfg.q, "exponent of the robust loss");
    app.add_option("--gamma", cfg.gamma, "asymmetry of the linex loss");
    app.add_option("--lambda", cfg.lambda, "l1 penalty (default 0.1 lambda_max)");
    app.add_option("--alpha", cfg.alpha, "miscoverage level");
    app.add_option("--eps-tol", cfg.eps_tol, "solver tolerance");
    app.add_option("--grid-points", cfg.grid_points, "grid baseline candidates");
    app.add_option("--split-fraction", cfg.split_fraction, "share of rows fitted by split conformal");
    app.add_option("--trials", cfg.trials, "bench repetitions");
    app.add_option("--methods", methods, "comma-separated subset of homotopy,grid,split,oracle");
    app.add_option("--jobs", cfg.jobs, "parallel bench trials");
    app.add_option("--probes", cfg.probes, "diagnose probe points");
    app.add_option("--curve-points", cfg.curve_points, "points of pi_curve.csv");
    app.add_option("--out", cfg.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        exit_code = app.exit(e);
        return false;
    }

    static const std::vector<std::string> names{"path", "conformal", "baseline", "diagnose", "bench"};
    cfg.command = static_cast<Command>(std::find(names.begin(), names.end(), command) - names.begin());
    if (!methods.empty()) {
        cfg.methods.clear();
        std::stringstream ss(methods);
        for (std::string m; std::getline(ss, m, ',');)
            if (!m.empty())
                cfg.methods.push_back(m);
    } else if (cfg.command == Command::Baseline) {
        cfg.methods = {"grid", "split", "oracle"};
    }
    exit_code = 0;
    return true;
}

namespace {

class Outputs {
public:
    explicit Outputs(std::string dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& contents)
    {
        const std::string path = (fs::path(dir_) / name).string();
        written_.push_back(path);
        write_file(path, contents);
    }
    void discard()
    {
        std::error_code ec;
        for (const std::string& f : written_)
            fs::remove(f, ec);
        written_.clear();
    }

private:
    std::string dir_;
    std::vector<std::string> written_;
};

std::vector<double> even_grid(double lo, double hi, int count)
{
    std::vector<double> g(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
        g[static_cast<std::size_t>(k)] = k + 1 == count ? hi : lo + (hi - lo) * k / (count - 1);
    return g;
}

std::string dump(const json& j)
{
    return j.dump(2) + "\n";
}

void execute(const RunConfig& cfg, Outputs& out)
{
    const LossModel model = cfg.loss_model();
    const SolverConfig sc = solver_for(cfg, model);

    if (cfg.command == Command::Bench) {
        const std::vector<BenchRow> rows = run_bench(cfg);
        std::ostringstream table, timing;
        table << "method,dataset,loss,coverage,length,empty,trials\n";
        timing << "method,dataset,loss,mean_time_s,total_time_s,trials\n";
        for (const BenchRow& r : rows) {
            table << r.method << ',' << r.dataset << ',' << r.loss << ',' << format_number(r.coverage)
                  << ',' << format_number(r.length) << ',' << r.empty << ',' << r.trials << "\n";
            timing << r.method << ',' << r.dataset << ',' << r.loss << ',' << format_number(r.time_s)
                   << ',' << format_number(r.time_s * r.trials) << ',' << r.trials << "\n";
        }
        out.write("bench.csv", table.str());
        out.write("timing.csv", timing.str());
        return;
    }

    const Problem pr = make_problem(cfg, cfg.seed);
    const Matrix& X = pr.data.X;
    const Vector& y = pr.data.y;

    if (cfg.command == Command::Baseline) {
        BaselineConfig bc;
        bc.grid_points = cfg.grid_points;
        bc.split_fraction = cfg.split_fraction;
        bc.rng_seed = cfg.seed;
        json doc{{"alpha", cfg.alpha}, {"lambda", pr.lambda}, {"y_query", pr.y_query}};
        json intervals = json::array();
        for (const std::string& m : cfg.methods) {
            if (m == "homotopy")
                continue;
            const auto start = std::chrono::steady_clock::now();
            json j;
            switch (parse_baseline(m)) {
            case BaselineMethod::Grid:
                j = to_json(grid_conformal(X, y, pr.x_query, pr.lambda, model, cfg.alpha, sc, bc));
                break;
            case BaselineMethod::Split:
                j = to_json(split_conformal(X, y, pr.x_query, pr.lambda, model, cfg.alpha, sc, bc));
                break;
            case BaselineMethod::Oracle:
                j = to_json(oracle_conformal(X, y, pr.x_query, pr.y_query, pr.lambda, model, cfg.alpha, sc));
                break;
            }
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
            j["time_s"] = dt.count();
            intervals.push_back(std::move(j));
        }
        doc["intervals"] = std::move(intervals);
        out.write("baseline.json", dump(doc));
        return;
    }

    const SolutionPath path = trace_path(X, y, pr.x_query, pr.lambda, model, sc);

    if (cfg.command == Command::Path) {
        out.write("path.json", dump(to_json(path)));
        std::ostringstream csv;
        write_path_csv(csv, path);
        out.write("path.csv", csv.str());
        return;
    }

    if (cfg.command == Command::Conformal) {
        const ConformalResult cr = conformal_set(path, cfg.alpha);
        json doc = to_json(cr);
        doc["lambda"] = pr.lambda;
        doc["y_query"] = pr.y_query;
        doc["covered"] = !cr.empty && pr.y_query >= cr.lo && pr.y_query <= cr.hi;
        out.write("conformal.json", dump(doc));
        std::ostringstream csv;
        write_pi_csv(csv, pi_curve(cr, even_grid(path.z_min, path.z_max, cfg.curve_points)));
        out.write("pi_curve.csv", csv.str());
        return;
    }

    // diagnose
    const std::vector<double> probes = even_grid(path.z_min, path.z_max, std::max(cfg.probes, 2));
    const std::vector<GapPoint> gaps = primal_gap_curve(path, probes);
    std::vector<BoundReport> reports;
    json doc{{"lambda", pr.lambda}, {"loss", to_json(model)}, {"eps_tol", path.eps_tol}};
    try {
        reports = check_error_bound(path, probes);
        json list = json::array();
        bool all = true;
        for (const BoundReport& r : reports) {
            list.push_back(to_json(r));
            all = all && r.holds;
        }
        doc["all_hold"] = all;
        doc["reports"] = std::move(list);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotStronglyConvex)
            throw;
        doc["all_hold"] = nullptr;
        doc["skipped"] = e.what();
        doc["reports"] = json::array();
    }
    std::ostringstream csv;
    write_gap_csv(csv, gaps, reports);
    out.write("gap_curve.csv", csv.str());
    out.write("bound_report.json", dump(doc));
}

json error_json(const std::string& kind, const std::string& message)
{
    return {{"error", {{"kind", kind}, {"message", message}}}};
}

} // namespace

int run(const RunConfig& cfg, std::ostream& err)
{
    Outputs out(cfg.out);
    try {
        cfg.validate();
        std::error_code ec;
        fs::create_directories(cfg.out, ec);
        if (ec)
            throw Error(ErrorKind::Io, "cannot create '" + cfg.out + "': " + ec.message());
        execute(cfg, out);
        return 0;
    } catch (const CsvError& e) {
        out.discard();
        json j = error_json(std::string(to_string(e.kind())), e.what());
        j["error"]["row"] = e.row();
        j["error"]["column"] = e.column();
        err << j.dump() << "\n";
    } catch (const Error& e) {
        out.discard();
        err << error_json(std::string(to_string(e.kind())), e.what()).dump() << "\n";
    } catch (const std::exception& e) {
        out.discard();
        err << error_json("Internal", e.what()).dump() << "\n";
    }
    return 1;
}

} // namespace sparseconf
