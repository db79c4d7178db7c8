#pragma once

#include "zpat/scalar.hpp"
#include "zpat/matrix.hpp"
#include "zpat/pattern.hpp"
#include "zpat/json_io.hpp"
#include "zpat/parallel.hpp"
#include "zpat/solver.hpp"
#include "zpat/fano.hpp"
#include "zpat/gadget.hpp"
#include "zpat/separators.hpp"
