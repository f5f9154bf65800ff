# Tests for totpos
