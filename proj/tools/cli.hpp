#pragma once

namespace ooe::cli {

// Entry point of the ooesim tool; returns the process exit code.
//   0 clean / feasible, 1 usage, parse or validation error,
//   2 deadline miss, 3 sensor fault, 4 feasibility violation,
//   5 instance outside the exhaustive-check bounds.
int main(int argc, const char* const* argv);

}  // namespace ooe::cli
