#pragma once

#include "blfix/baseline.hpp"
#include "blfix/cone.hpp"
#include "blfix/datum.hpp"
#include "blfix/errors.hpp"
#include "blfix/format.hpp"
#include "blfix/io.hpp"
#include "blfix/matcore.hpp"
#include "blfix/objective.hpp"
#include "blfix/solve.hpp"
