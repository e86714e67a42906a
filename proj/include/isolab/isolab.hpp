#pragma once

#include "isolab/corpus.hpp"
#include "isolab/csv.hpp"
#include "isolab/dimensions.hpp"
#include "isolab/encoder.hpp"
#include "isolab/error.hpp"
#include "isolab/frequency.hpp"
#include "isolab/geometry.hpp"
#include "isolab/infonce.hpp"
#include "isolab/manifest.hpp"
#include "isolab/random.hpp"
#include "isolab/stats.hpp"
#include "isolab/synthetic.hpp"
#include "isolab/training.hpp"
#include "isolab/vector_ops.hpp"
#include "isolab/version.hpp"
