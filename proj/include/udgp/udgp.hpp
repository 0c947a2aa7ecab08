#ifndef UDGP_UDGP_HPP
#define UDGP_UDGP_HPP

#include "udgp/branch_and_bound.hpp"
#include "udgp/common.hpp"
#include "udgp/dgp.hpp"
#include "udgp/instance.hpp"
#include "udgp/io.hpp"
#include "udgp/linalg.hpp"
#include "udgp/matrix.hpp"
#include "udgp/metrics.hpp"
#include "udgp/middp.hpp"
#include "udgp/milp.hpp"
#include "udgp/pipeline.hpp"
#include "udgp/rng.hpp"
#include "udgp/simplex.hpp"

#endif
