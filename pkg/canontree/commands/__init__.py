# Command groups
