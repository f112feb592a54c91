#pragma once

#include "porofem/error.hpp"
#include "porofem/geometry.hpp"
#include "porofem/mesh.hpp"
#include "porofem/quadrature.hpp"
#include "porofem/fespace.hpp"
#include "porofem/assembly.hpp"
#include "porofem/problem.hpp"
#include "porofem/solver.hpp"
#include "porofem/analysis.hpp"
#include "porofem/bessel.hpp"
#include "porofem/benchmarks.hpp"
#include "porofem/io.hpp"
