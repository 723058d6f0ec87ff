#pragma once

#include "wombat/analyse.hpp"
#include "wombat/catalog.hpp"
#include "wombat/error.hpp"
#include "wombat/identifier.hpp"
#include "wombat/phrases.hpp"
#include "wombat/pipeline.hpp"
#include "wombat/porter_stemmer.hpp"
#include "wombat/retrieve.hpp"
#include "wombat/stopwords.hpp"
#include "wombat/store.hpp"
