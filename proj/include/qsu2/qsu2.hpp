/// Umbrella header for the library (the CLI lives in qsu2/cli.hpp).
#pragma once

#include "qsu2/casimir_r.hpp"
#include "qsu2/classical_limit.hpp"
#include "qsu2/heisenberg.hpp"
#include "qsu2/qcore.hpp"
#include "qsu2/sr_algebra.hpp"
#include "qsu2/standard_rep.hpp"
#include "qsu2/triangular_rep.hpp"
