#pragma once

#include "ridgepath/cvsearch.hpp"
#include "ridgepath/datagen.hpp"
#include "ridgepath/dense_matrix.hpp"
#include "ridgepath/errors.hpp"
#include "ridgepath/format.hpp"
#include "ridgepath/linalg.hpp"
#include "ridgepath/matrix_io.hpp"
#include "ridgepath/numeric.hpp"
#include "ridgepath/parallel.hpp"
#include "ridgepath/pichol.hpp"
#include "ridgepath/ridge.hpp"
#include "ridgepath/theory.hpp"
#include "ridgepath/trivec.hpp"
