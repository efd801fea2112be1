// lred: mechanized symmetry reduction of differential systems on bundles,
// without assuming the group action is transverse to the fibers.
#include <CLI11.hpp>
#include <future>
#include <iostream>

#include "lred/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "lred — symmetry reduction of differential systems, including "
        "non-transverse group actions"};
    std::string command;
    std::vector<std::string> files;
    std::string format = "text";
    std::string candidates_file;
    int jobs = 1;
    int max_degree = -1;
    long long seed = -1;
    double tol_num = -1.0, tol_fd = -1.0;

    app.add_option("command", command,
                   "one of: check, kinematic, invariants, reduce, verify, residual, "
                   "universal, all")
        ->required()
        ->check(CLI::IsMember({"check", "kinematic", "invariants", "reduce", "verify",
                               "residual", "universal", "all"}));
    app.add_option("files", files, "problem file(s), JSON")->required();
    app.add_option("--format", format, "report format")
        ->check(CLI::IsMember({"text", "json"}));
    app.add_option("--max-degree", max_degree, "invariant search degree bound");
    app.add_option("--seed", seed, "deterministic seed for probing and sampling");
    app.add_option("--tol-num", tol_num, "flow-drift tolerance");
    app.add_option("--tol-fd", tol_fd, "finite-difference tolerance");
    app.add_option("--candidates", candidates_file,
                   "JSON file with extra residual candidate fields");
    app.add_option("--jobs", jobs, "run problem files concurrently")
        ->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    auto run_one = [&](const std::string& path) -> lred::RunResult {
        try {
            lred::Problem p = lred::load_problem(path);
            if (max_degree >= 0) p.options.max_degree = max_degree;
            if (seed >= 0) p.options.seed = static_cast<uint64_t>(seed);
            if (tol_num >= 0) p.options.tol_num = tol_num;
            if (tol_fd >= 0) p.options.tol_fd = tol_fd;
            if (!candidates_file.empty()) {
                std::ifstream in(candidates_file);
                if (!in) throw lred::LredError("SchemaError",
                                               "cannot open " + candidates_file);
                nlohmann::json extra = nlohmann::json::parse(in);
                nlohmann::json doc = lred::save_problem(p);
                for (const auto& c : extra)
                    doc["residual_candidates"].push_back(c);
                p = lred::problem_from_json(doc, p.source_text);
            }
            return lred::run_command(command, p);
        } catch (const lred::LredError& e) {
            lred::RunResult r;
            r.exit_code = 1;
            r.report = {{"problem", path},
                        {"error", {{"code", e.code}, {"message", e.what()}}}};
            r.text = std::string("error ") + e.what() + "\n";
            return r;
        }
    };

    std::vector<lred::RunResult> results(files.size());
    if (jobs > 1 && files.size() > 1) {
        std::vector<std::future<lred::RunResult>> futs;
        for (const auto& f : files)
            futs.push_back(std::async(std::launch::async, run_one, f));
        for (size_t i = 0; i < futs.size(); ++i) results[i] = futs[i].get();
    } else {
        for (size_t i = 0; i < files.size(); ++i) results[i] = run_one(files[i]);
    }

    int exit_code = 0;
    for (const auto& r : results) {
        if (format == "json")
            std::cout << r.report.dump(2) << "\n";
        else
            std::cout << r.text;
        if (r.exit_code == 1) exit_code = 1;
        else if (r.exit_code == 2 && exit_code == 0) exit_code = 2;
    }
    return exit_code;
}
