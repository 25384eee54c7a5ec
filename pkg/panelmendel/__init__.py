from flask import Flask

from panelmendel import db


def build_app() -> Flask:
    app = Flask(__name__, instance_relative_config=True)

    # Configs
    # Load the default configuration
    app.config.from_object("config.default")
    # Load the configuration from the instance folder
    app.config.from_pyfile('config.py', silent=True)
    # Load config according to run environment
    # Variables defined here will override those in the default configuration
    if app.debug:
        app.config.from_object("config.debug")
    else:
        app.config.from_object("config.production")

    # Engine modules log through children of the app logger
    app.logger.setLevel(app.config["LOG_LEVEL"])

    db.init_app(app)

    # apply the blueprints to the app
    from panelmendel import predict
    app.register_blueprint(predict.bp)
    from panelmendel import simulate
    app.register_blueprint(simulate.bp)
    from panelmendel import validate
    app.register_blueprint(validate.bp)
    from panelmendel import bench
    app.register_blueprint(bench.bp)
    from panelmendel import collapse
    app.register_blueprint(collapse.bp)

    return app


app = build_app()
