#pragma once

#include <iosfwd>

namespace rtovc::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,         // bad arguments, unreadable or invalid input files
    kBarrierTrip = 2,   // simulate ended with a barrier trip
    kCheckFailed = 3,   // verify reported FAIL, tuning failed, or the plant faulted
};

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rtovc::cli
