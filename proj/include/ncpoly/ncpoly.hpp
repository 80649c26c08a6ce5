#pragma once

#include "ncpoly/classical.hpp"
#include "ncpoly/dilation.hpp"
#include "ncpoly/errors.hpp"
#include "ncpoly/json_io.hpp"
#include "ncpoly/matrix.hpp"
#include "ncpoly/opkernels.hpp"
#include "ncpoly/povm.hpp"
#include "ncpoly/qpoly.hpp"
#include "ncpoly/random.hpp"
#include "ncpoly/rng.hpp"
#include "ncpoly/space.hpp"
#include "ncpoly/states.hpp"
#include "ncpoly/suite.hpp"
