#pragma once

#include "lppls/calibrate.hpp"
#include "lppls/error.hpp"
#include "lppls/intervals.hpp"
#include "lppls/likelihood.hpp"
#include "lppls/model.hpp"
#include "lppls/multiscale.hpp"
#include "lppls/series.hpp"
#include "lppls/synthetic.hpp"
