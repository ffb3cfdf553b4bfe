#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "jkit/algebroid.hpp"

namespace jkit::dsl {

/// Poissonization result carried inside a plain-flavor file: the lifted
/// structure lives on the product chart with exponential coefficients, so it
/// can be printed but not combined with the file's own values.
struct ForeignHomog {
    HomogeneousTwistedPoisson<ExpCoeff> h;
};

/// Anything a name can bind to, or an expression can evaluate to.
template <class K>
using Value = std::variant<K, Tensor<K>, E1Section<K>, TwistedJacobiStructure<K>,
                           TlcsStructure<K>, HomogeneousTwistedPoisson<K>, SubBundleSpec<K>,
                           ForeignHomog>;

/// Evaluated bindings of one source file, in declaration order.
template <class K>
struct FileEnv {
    ChartPtr chart;
    std::string manifold;
    std::vector<std::string> order;
    std::map<std::string, Value<K>> bindings;
};

struct CheckDirective {
    std::string kind;
    std::string target;
    std::vector<std::pair<std::string, std::string>> options;
    int line = 0;
    int column = 0;
};

/// A parsed and evaluated source file. The `weighted` chart keyword selects
/// the exponential coefficient flavor for every value in the file.
struct StructureFile {
    bool weighted = false;
    std::variant<FileEnv<Polynomial>, FileEnv<ExpCoeff>> env;
    std::vector<CheckDirective> checks;
};

struct RunOptions {
    int max_test_degree = 1;
    bool parallel = false;
};

/// Parses and evaluates a source file. Throws ParseError with position data
/// on malformed input and the library error types on bad values.
StructureFile parse_file(const std::string& source);

/// Evaluates one expression in the file's environment and returns the
/// canonical printed value. The result re-parses to an equal value.
std::string eval_expr(const StructureFile& file, const std::string& expr);

/// Executes the file's check directives in order.
std::vector<VerificationReport> run_checks(const StructureFile& file,
                                           const RunOptions& opts = {});

/// Canonical JSON document for a report list. Byte-identical for identical
/// reports: keys in schema order, timing pinned to zero.
std::string reports_json(const std::vector<VerificationReport>& reports);

/// Text rendering of one report for terminal output.
std::string report_text(const VerificationReport& rep);

/// Source text of a new file holding the homogeneous lift of the named
/// structure on the product chart.
std::string poissonize_file_text(const StructureFile& file, const std::string& structure_id);

}  // namespace jkit::dsl
