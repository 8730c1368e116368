#pragma once

#include "stokeslab/errors.hpp"
#include "stokeslab/mesh.hpp"
#include "stokeslab/quadrature.hpp"
#include "stokeslab/spaces.hpp"
#include "stokeslab/linalg.hpp"
#include "stokeslab/assembly.hpp"
#include "stokeslab/boundary_functional.hpp"
#include "stokeslab/solvers.hpp"
#include "stokeslab/norms.hpp"
#include "stokeslab/parallel.hpp"
#include "stokeslab/manufactured.hpp"
#include "stokeslab/verify.hpp"
#include "stokeslab/io.hpp"
