"""Sub-command modules; each exposes NAME, register() and run()"""
