#pragma once

#include "psmilu/aug_storage.hpp"
#include "psmilu/common.hpp"
#include "psmilu/condest.hpp"
#include "psmilu/crout.hpp"
#include "psmilu/dense.hpp"
#include "psmilu/dropping.hpp"
#include "psmilu/gmres.hpp"
#include "psmilu/matrix_market.hpp"
#include "psmilu/multilevel.hpp"
#include "psmilu/options.hpp"
#include "psmilu/preprocess.hpp"
#include "psmilu/problems.hpp"
#include "psmilu/schur.hpp"
#include "psmilu/serialize.hpp"
#include "psmilu/sparse.hpp"
#include "psmilu/sparse_accumulator.hpp"
