#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ipid {

/// Entry point of the ipid command line tool. args excludes the program name.
/// Results go to out (or the files named by --out); failures are reported on err as
/// a JSON object {"error": code, "message": text}. Returns the process exit code.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace ipid
