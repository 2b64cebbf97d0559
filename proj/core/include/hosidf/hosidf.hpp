#pragma once

#include "hosidf/closed_loop.hpp"
#include "hosidf/error.hpp"
#include "hosidf/library.hpp"
#include "hosidf/lti.hpp"
#include "hosidf/open_loop.hpp"
#include "hosidf/reset.hpp"
#include "hosidf/sim.hpp"
