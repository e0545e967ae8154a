#pragma once

#include "nonneg/bumps.hpp"
#include "nonneg/dyadic.hpp"
#include "nonneg/errors.hpp"
#include "nonneg/extension.hpp"
#include "nonneg/feasibility.hpp"
#include "nonneg/function.hpp"
#include "nonneg/gamma.hpp"
#include "nonneg/interpolate.hpp"
#include "nonneg/io.hpp"
#include "nonneg/jet.hpp"
#include "nonneg/lp.hpp"
#include "nonneg/multi_index.hpp"
#include "nonneg/whitney.hpp"
