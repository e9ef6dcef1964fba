#pragma once

namespace arht {

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical degeneracy.
int cli_main(int argc, char** argv);

}  // namespace arht
