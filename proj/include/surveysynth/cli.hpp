#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace surveysynth {

/// Input data that breaks a panel or record invariant.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Process exit status per failure category.
enum class ExitCode : int {
    ok = 0,
    internal = 1,
    usage = 2,
    config = 3,
    io = 4,
    data = 5,
    sampler = 6,
};

/// Environment variable holding the OpenMP worker count.
inline constexpr const char* kWorkersEnv = "SURVEYSYNTH_WORKERS";

/// Runs one command line (args[0] is the program name). Writes the run
/// summary to `out`; on failure writes one JSON error line to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace surveysynth
