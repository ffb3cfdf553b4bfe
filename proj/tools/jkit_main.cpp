#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "jkit/dsl.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw jkit::UsageError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_check(const std::string& path, bool json, int max_degree, bool parallel) {
    jkit::dsl::StructureFile file = jkit::dsl::parse_file(read_file(path));
    jkit::dsl::RunOptions opts;
    opts.max_test_degree = max_degree;
    opts.parallel = parallel;
    auto reports = jkit::dsl::run_checks(file, opts);
    if (json) {
        std::cout << jkit::dsl::reports_json(reports);
    } else {
        for (const auto& rep : reports) std::cout << jkit::dsl::report_text(rep);
    }
    for (const auto& rep : reports)
        if (!rep.pass) return 1;
    return 0;
}

int run_eval(const std::string& path, const std::string& expr) {
    jkit::dsl::StructureFile file = jkit::dsl::parse_file(read_file(path));
    std::cout << jkit::dsl::eval_expr(file, expr) << "\n";
    return 0;
}

int run_poissonize(const std::string& path, const std::string& structure_id,
                   const std::string& out_path) {
    jkit::dsl::StructureFile file = jkit::dsl::parse_file(read_file(path));
    std::string text = jkit::dsl::poissonize_file_text(file, structure_id);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw jkit::UsageError("cannot write '" + out_path + "'");
    out << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact symbolic checks for twisted Jacobi data"};
    app.require_subcommand(1);

    auto* check = app.add_subcommand("check", "run the check directives of a structure file");
    std::string check_path;
    bool json = false;
    int max_degree = 1;
    bool parallel = false;
    check->add_option("file", check_path, "structure file")->required();
    check->add_flag("--json", json, "emit the JSON report");
    check->add_option("--max-test-degree", max_degree,
                      "polynomial degree of the generated test functions");
    check->add_flag("--parallel", parallel, "run check directives concurrently");

    auto* eval = app.add_subcommand("eval", "evaluate an expression in a file's scope");
    std::string eval_path, expr;
    eval->add_option("file", eval_path, "structure file")->required();
    eval->add_option("--expr", expr, "expression to evaluate")->required();

    auto* poi = app.add_subcommand("poissonize", "emit the homogeneous lift as a new file");
    std::string poi_path, structure_id, out_path;
    poi->add_option("file", poi_path, "structure file")->required();
    poi->add_option("--structure", structure_id, "structure binding to lift")->required();
    poi->add_option("--out", out_path, "output file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return run_check(check_path, json, max_degree, parallel);
        if (eval->parsed()) return run_eval(eval_path, expr);
        return run_poissonize(poi_path, structure_id, out_path);
    } catch (const jkit::ParseError& err) {
        std::cerr << "parse error: " << err.what() << "\n";
        return 2;
    } catch (const jkit::Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
}
