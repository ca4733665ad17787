#ifndef COVCP_COVCP_HPP
#define COVCP_COVCP_HPP

#include "covcp/cptest.hpp"
#include "covcp/errors.hpp"
#include "covcp/harness.hpp"
#include "covcp/io.hpp"
#include "covcp/limits.hpp"
#include "covcp/lrv.hpp"
#include "covcp/parallel.hpp"
#include "covcp/rng.hpp"
#include "covcp/simgen.hpp"
#include "covcp/sumproc.hpp"
#include "covcp/types.hpp"

#endif  // COVCP_COVCP_HPP
