#pragma once

// Umbrella header for the library (CLI front end excluded).

#include "supgoc/types.hpp"
#include "supgoc/mesh.hpp"
#include "supgoc/quadrature.hpp"
#include "supgoc/fe_space.hpp"
#include "supgoc/problem.hpp"
#include "supgoc/stabilization.hpp"
#include "supgoc/assembly.hpp"
#include "supgoc/kkt.hpp"
#include "supgoc/solver.hpp"
#include "supgoc/analysis.hpp"
#include "supgoc/report.hpp"
#include "supgoc/config.hpp"
