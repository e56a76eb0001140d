#ifndef NLD_HPP
#define NLD_HPP

#include "nld/assembly.hpp"
#include "nld/coefficients.hpp"
#include "nld/domain.hpp"
#include "nld/error.hpp"
#include "nld/perron.hpp"
#include "nld/simulator.hpp"
#include "nld/sis.hpp"
#include "nld/spectral.hpp"
#include "nld/variational.hpp"
#include "nld/weighted_problem.hpp"

#endif  // NLD_HPP
